//! Noise-rate scans: a full multi-start run per bit-flip rate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzVariant;
use crate::cost::{overlap, CostContext, CostKind};
use crate::error::{Error, Result};
use crate::model::SpinChainSpec;
use crate::noise::NoiseModel;
use crate::optimize::{cluster_solutions, multi_start, MinimaBranches, OptimizerConfig, SolutionSet};

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub variant: AnsatzVariant,
    pub num_spins: usize,
    pub num_layers: usize,
    pub coupling: f64,
    pub field: f64,
    pub seed: u64,
    pub n_starts: usize,
    pub cost: CostKind,
    pub cluster_tolerance: f64,
    /// n_layers · N; multiply p_x by this for the scaled axis.
    pub noise_scale: f64,
    pub optimizer: OptimizerConfig,
}

impl ScanMetadata {
    pub fn chain(&self) -> SpinChainSpec {
        SpinChainSpec {
            num_spins: self.num_spins,
            coupling: self.coupling,
            field: self.field,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub p_x: f64,
    pub scaled_px: f64,
    pub best_energy: f64,
    /// Overlap of the exact noisy state at the best parameters.
    pub best_overlap: f64,
    pub branches: MinimaBranches,
    pub solutions: SolutionSet,
}

impl ScanRow {
    pub fn best_theta(&self) -> &[f64] {
        &self.solutions.best().theta_final
    }

    /// Per-cluster mean energies, ascending.
    pub fn branch_energies(&self) -> Vec<f64> {
        self.branches.clusters.iter().map(|c| c.mean_energy).collect()
    }

    pub fn all_solution_energies(&self) -> Vec<f64> {
        self.solutions.energies()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub metadata: ScanMetadata,
    pub rows: Vec<ScanRow>,
    /// Data-quality notes such as a best energy that decreases with p_x.
    pub warnings: Vec<String>,
}

impl ScanTable {
    pub fn px(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.p_x).collect()
    }

    pub fn best_energies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.best_energy).collect()
    }

    pub fn overlaps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.best_overlap).collect()
    }

    /// Context for re-optimizing at `p_x` under this table's settings.
    pub fn context(&self, p_x: f64) -> Result<CostContext> {
        CostContext::new(self.metadata.variant, &self.metadata.chain(), NoiseModel::bit_flip(p_x))
    }
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// Grid of p_x values whose scaled rates p_x·n_ℓ·N run from `lo` to `hi`.
pub fn scaled_grid(variant: AnsatzVariant, lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let s = variant.noise_scale();
    linspace(lo, hi, steps).into_iter().map(|v| v / s).collect()
}

pub fn validate_grid(px_grid: &[f64], num_qubits: usize) -> Result<()> {
    if px_grid.is_empty() {
        return Err(Error::Config("empty p_x grid".into()));
    }
    if px_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("p_x grid must be strictly ascending".into()));
    }
    for &p in px_grid {
        NoiseModel::bit_flip(p).validate(num_qubits)?;
    }
    Ok(())
}

/// Multi-start scan with the exact cost.
pub fn scan_noise(
    variant: AnsatzVariant,
    chain: &SpinChainSpec,
    px_grid: &[f64],
    config: &OptimizerConfig,
) -> Result<ScanTable> {
    scan_noise_with(variant, chain, px_grid, config, CostKind::Exact, DEFAULT_CLUSTER_TOL)
}

pub fn scan_noise_with(
    variant: AnsatzVariant,
    chain: &SpinChainSpec,
    px_grid: &[f64],
    config: &OptimizerConfig,
    cost: CostKind,
    cluster_tolerance: f64,
) -> Result<ScanTable> {
    config.validate()?;
    chain.validate()?;
    validate_grid(px_grid, variant.num_qubits())?;
    let base = CostContext::new(variant, chain, NoiseModel::noiseless())?;
    let scale = variant.noise_scale();
    let rows = px_grid
        .par_iter()
        .map(|&p_x| -> Result<ScanRow> {
            let ctx = base.with_noise(NoiseModel::bit_flip(p_x))?;
            let solutions = multi_start(&ctx, cost, config)?;
            let branches = cluster_solutions(&solutions, cluster_tolerance);
            let best_overlap = overlap(&ctx, &solutions.best().theta_final)?;
            Ok(ScanRow {
                p_x,
                scaled_px: p_x * scale,
                best_energy: solutions.best().energy_final,
                best_overlap,
                branches,
                solutions,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let warnings = rows
        .windows(2)
        .filter(|w| w[1].best_energy < w[0].best_energy)
        .map(|w| {
            format!(
                "best energy decreases from {:.10} to {:.10} between p_x = {} and {}",
                w[0].best_energy, w[1].best_energy, w[0].p_x, w[1].p_x
            )
        })
        .collect();
    Ok(ScanTable {
        metadata: ScanMetadata {
            variant,
            num_spins: chain.num_spins,
            num_layers: variant.num_layers(),
            coupling: chain.coupling,
            field: chain.field,
            seed: config.seed,
            n_starts: config.n_starts,
            cost,
            cluster_tolerance,
            noise_scale: scale,
            optimizer: *config,
        },
        rows,
        warnings,
    })
}

/// Exact and perturbative scans over the same grid and starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedScan {
    pub exact: ScanTable,
    pub perturbative: ScanTable,
}

impl PairedScan {
    /// Largest |E_exact − E_pert| over the rows.
    pub fn max_gap(&self) -> f64 {
        self.exact
            .rows
            .iter()
            .zip(&self.perturbative.rows)
            .map(|(a, b)| (a.best_energy - b.best_energy).abs())
            .fold(0.0, f64::max)
    }
}

pub fn compare_perturbative(
    variant: AnsatzVariant,
    chain: &SpinChainSpec,
    px_grid: &[f64],
    config: &OptimizerConfig,
) -> Result<PairedScan> {
    Ok(PairedScan {
        exact: scan_noise_with(variant, chain, px_grid, config, CostKind::Exact, DEFAULT_CLUSTER_TOL)?,
        perturbative: scan_noise_with(
            variant,
            chain,
            px_grid,
            config,
            CostKind::Perturbative,
            DEFAULT_CLUSTER_TOL,
        )?,
    })
}
