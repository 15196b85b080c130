//! Emulated noise amplification by CNOT folding on the dimer.

use serde::{Deserialize, Serialize};

use crate::ansatz::{expand_two_param, simulate, AnsatzVariant};
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, SpinChainSpec};
use crate::noise::{fold_layout, CnotNoise, FoldSetting, NoiseModel};
use crate::qcore::expectation;

/// Per-CNOT channel used by `fold_experiment`. Two-qubit depolarizing on the
/// dimer commutes with everything that follows the single CNOT and rescales
/// both energies by the same factor, so it cannot reorder the minima.
pub const FOLD_DEFAULT_NOISE: CnotNoise = CnotNoise::LocalDepolarizing;
pub const FOLD_DEFAULT_P2: f64 = 5e-3;
pub const FOLD_DEFAULT_M_MAX: usize = 80;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub m_values: Vec<usize>,
    pub energy_min1: Vec<f64>,
    pub energy_min2: Vec<f64>,
    /// First m with energy(min1) > energy(min2).
    pub crossover_m: Option<usize>,
    pub p2: f64,
    pub cnot_noise: CnotNoise,
}

impl FoldReport {
    /// Least-squares slopes (dE1/dm, dE2/dm) over the m values before the
    /// crossover (all of them if there is none).
    pub fn pre_crossover_slopes(&self) -> (f64, f64) {
        let cut = self
            .crossover_m
            .and_then(|c| self.m_values.iter().position(|&m| m == c))
            .unwrap_or(self.m_values.len());
        let xs: Vec<f64> = self.m_values[..cut].iter().map(|&m| m as f64).collect();
        let fit = |ys: &[f64]| {
            if xs.len() < 2 {
                return 0.0;
            }
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            sxy / sxx
        };
        (fit(&self.energy_min1[..cut]), fit(&self.energy_min2[..cut]))
    }

    pub fn to_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["m", "energy_min1", "energy_min2"])?;
            for ((m, a), b) in self.m_values.iter().zip(&self.energy_min1).zip(&self.energy_min2) {
                w.write_record([m.to_string(), a.to_string(), b.to_string()])?;
            }
            w.flush()?;
        }
        match self.crossover_m {
            Some(m) => writeln!(out, "# crossover_m,{m}")?,
            None => writeln!(out, "# crossover_m,none")?,
        }
        Ok(())
    }
}

fn dimer8_theta(theta: &[f64]) -> Result<Vec<f64>> {
    match theta.len() {
        2 => Ok(expand_two_param(theta[0], theta[1]).to_vec()),
        8 => Ok(theta.to_vec()),
        n => Err(Error::ParameterCount { expected: 2, actual: n }),
    }
}

/// Energies of two dimer parameter sets (DIMER2 pairs or full DIMER8
/// vectors) on the folded DIMER8 circuit, with the default channel.
pub fn fold_experiment(min1_theta: &[f64], min2_theta: &[f64], m_values: &[usize], p2: f64) -> Result<FoldReport> {
    fold_experiment_with(min1_theta, min2_theta, m_values, p2, FOLD_DEFAULT_NOISE)
}

pub fn fold_experiment_with(
    min1_theta: &[f64],
    min2_theta: &[f64],
    m_values: &[usize],
    p2: f64,
    cnot_noise: CnotNoise,
) -> Result<FoldReport> {
    let t1 = dimer8_theta(min1_theta)?;
    let t2 = dimer8_theta(min2_theta)?;
    let noise = NoiseModel::per_cnot(cnot_noise, p2);
    noise.validate(2)?;
    let h = build_hamiltonian(&SpinChainSpec::unit(2))?;
    let base = AnsatzVariant::Dimer8.layout()?;
    let mut energy_min1 = Vec::with_capacity(m_values.len());
    let mut energy_min2 = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let layout = fold_layout(&base, FoldSetting { m });
        energy_min1.push(expectation(&simulate(&layout, &t1, &noise)?, &h)?);
        energy_min2.push(expectation(&simulate(&layout, &t2, &noise)?, &h)?);
    }
    let crossover_m = m_values
        .iter()
        .zip(energy_min1.iter().zip(&energy_min2))
        .find(|(_, (a, b))| a > b)
        .map(|(&m, _)| m);
    Ok(FoldReport {
        m_values: m_values.to_vec(),
        energy_min1,
        energy_min2,
        crossover_m,
        p2,
        cnot_noise,
    })
}
