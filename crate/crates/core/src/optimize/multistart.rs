//! Multi-start orchestration with counter-based random streams.
//!
//! Start `k` draws its initial point from a ChaCha stream keyed by
//! `(seed, k)`, so results do not depend on thread count or scheduling.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::{local_minimize, Objective, OptimizerConfig, SolutionRecord, SolutionSet};
use crate::ansatz::wrap_angles;
use crate::cost::{CostContext, CostKind, EnergyObjective};
use crate::error::{Error, Result};

/// Random stream for one start index.
pub struct StartStream(ChaCha20Rng);

impl StartStream {
    pub fn new(seed: u64, start_index: usize) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(start_index as u64);
        Self(rng)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.gen_range(lo..hi)
    }
}

/// Initial point of start `start_index`, uniform in `config.init_range`.
pub fn start_point(dim: usize, config: &OptimizerConfig, start_index: usize) -> Vec<f64> {
    let (lo, hi) = config.init_range;
    let mut s = StartStream::new(config.seed, start_index);
    (0..dim).map(|_| s.uniform(lo, hi)).collect()
}

/// Local minimization of a single start.
pub fn run_start(obj: &dyn Objective, config: &OptimizerConfig, start_index: usize) -> SolutionRecord {
    let x0 = start_point(obj.dim(), config, start_index);
    local_minimize(obj, &x0, config, start_index)
}

/// Runs `config.n_starts` independent local minimizations in parallel.
/// Records are returned in start order; parameters are left unwrapped.
pub fn multi_start_objective(obj: &dyn Objective, config: &OptimizerConfig) -> Result<SolutionSet> {
    config.validate()?;
    let records: Vec<SolutionRecord> = (0..config.n_starts)
        .into_par_iter()
        .map(|k| run_start(obj, config, k))
        .collect();
    if let Some(bad) = records.iter().find(|r| !r.energy_final.is_finite()) {
        return Err(Error::Numerical(format!(
            "start {} produced non-finite energy",
            bad.start_index
        )));
    }
    Ok(SolutionSet::from_records(records))
}

/// Multi-start minimization of the ansatz energy. Final angles are wrapped
/// into [−π, π) and the energy is re-evaluated at the wrapped point.
pub fn multi_start(ctx: &CostContext, kind: CostKind, config: &OptimizerConfig) -> Result<SolutionSet> {
    let obj = EnergyObjective::new(ctx, kind);
    let mut set = multi_start_objective(&obj, config)?;
    for r in set.records.iter_mut() {
        r.theta_final = wrap_angles(&r.theta_final);
        r.energy_final = obj.value(&r.theta_final);
    }
    Ok(SolutionSet::from_records(set.records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::FnObjective;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let cfg = OptimizerConfig::default().with_seed(11);
        assert_eq!(start_point(5, &cfg, 3), start_point(5, &cfg, 3));
        assert_ne!(start_point(5, &cfg, 3), start_point(5, &cfg, 4));
        let other = OptimizerConfig::default().with_seed(12);
        assert_ne!(start_point(5, &cfg, 3), start_point(5, &other, 3));
        let (lo, hi) = cfg.init_range;
        assert!(start_point(50, &cfg, 0).iter().all(|&x| lo <= x && x < hi));
    }

    #[test]
    fn start_point_ignores_run_size() {
        let a = OptimizerConfig::default().with_starts(4);
        let b = OptimizerConfig::default().with_starts(400);
        assert_eq!(start_point(3, &a, 2), start_point(3, &b, 2));
    }

    #[test]
    fn multi_start_orders_records_and_picks_best() {
        // Double well with minima at ±1, tilted so −1 is lower.
        let obj = FnObjective::new(
            1,
            |x: &[f64]| (x[0] * x[0] - 1.0).powi(2) + 0.1 * x[0],
            |x: &[f64]| vec![4.0 * x[0] * (x[0] * x[0] - 1.0) + 0.1],
        );
        let cfg = OptimizerConfig {
            init_range: (-2.0, 2.0),
            n_starts: 16,
            ..OptimizerConfig::default()
        };
        let set = multi_start_objective(&obj, &cfg).unwrap();
        assert_eq!(set.records.len(), 16);
        assert!(set.records.iter().enumerate().all(|(i, r)| r.start_index == i));
        assert!(set.best().theta_final[0] < 0.0);
        let min_e = set.energies().into_iter().fold(f64::INFINITY, f64::min);
        assert_eq!(set.best().energy_final, min_e);
    }

    #[test]
    fn zero_starts_rejected() {
        let obj = FnObjective::new(1, |x: &[f64]| x[0] * x[0], |x: &[f64]| vec![2.0 * x[0]]);
        assert!(multi_start_objective(&obj, &OptimizerConfig::default().with_starts(0)).is_err());
    }
}
