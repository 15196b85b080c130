//! Local quasi-Newton minimization, multi-start orchestration and clustering
//! of the resulting minima.

mod cluster;
mod lbfgs;
mod multistart;

pub use cluster::{cluster_solutions, Cluster, MinimaBranches};
pub use lbfgs::local_minimize;
pub use multistart::{multi_start, multi_start_objective, run_start, start_point, StartStream};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A differentiable scalar function of a parameter vector.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>);
}

/// Objective assembled from two closures.
pub struct FnObjective<F, G> {
    dim: usize,
    f: F,
    g: G,
}

impl<F, G> FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pub fn new(dim: usize, f: F, g: G) -> Self {
        Self { dim, f, g }
    }
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        ((self.f)(x), (self.g)(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Convergence threshold on ‖∇E‖∞.
    pub gradient_tolerance: f64,
    pub memory_pairs: usize,
    pub n_starts: usize,
    pub init_range: (f64, f64),
    pub seed: u64,
    /// Sufficient-decrease constant of the line search.
    pub wolfe_c1: f64,
    /// Curvature constant of the line search.
    pub wolfe_c2: f64,
    pub max_line_search: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            gradient_tolerance: 1e-8,
            memory_pairs: 10,
            n_starts: 128,
            init_range: (-PI, PI),
            seed: 0,
            wolfe_c1: 1e-4,
            wolfe_c2: 0.9,
            max_line_search: 40,
        }
    }
}

impl OptimizerConfig {
    pub fn with_starts(mut self, n_starts: usize) -> Self {
        self.n_starts = n_starts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_starts < 1 {
            return Err(Error::Config("n_starts must be at least 1".into()));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::Config("gradient tolerance must be positive".into()));
        }
        if self.memory_pairs < 1 {
            return Err(Error::Config("memory_pairs must be at least 1".into()));
        }
        let (lo, hi) = self.init_range;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("invalid init range [{lo}, {hi}]")));
        }
        if !(0.0 < self.wolfe_c1 && self.wolfe_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return Err(Error::Config("need 0 < c1 < c2 < 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub theta_final: Vec<f64>,
    pub energy_final: f64,
    pub start_index: usize,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub records: Vec<SolutionRecord>,
    /// Index into `records` of the lowest energy (lowest start index on ties).
    pub best: usize,
}

impl SolutionSet {
    pub fn from_records(records: Vec<SolutionRecord>) -> Self {
        let best = records
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                a.energy_final
                    .total_cmp(&b.energy_final)
                    .then(a.start_index.cmp(&b.start_index))
            })
            .map(|(i, _)| i)
            .unwrap_or(0);
        Self { records, best }
    }

    pub fn best(&self) -> &SolutionRecord {
        &self.records[self.best]
    }

    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy_final).collect()
    }

    pub fn converged_count(&self) -> usize {
        self.records.iter().filter(|r| r.converged).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `start_index,energy_final,converged` rows with a header.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["start_index", "energy_final", "converged"])?;
        for r in &self.records {
            w.write_record([
                r.start_index.to_string(),
                format!("{:.17e}", r.energy_final),
                r.converged.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
