//! Dense rasters of the two-parameter dimer cost and their basins.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzVariant;
use crate::cost::{energy, CostContext, CostKind, EnergyObjective};
use crate::error::{Error, Result};
use crate::model::SpinChainSpec;
use crate::noise::NoiseModel;
use crate::optimize::{local_minimize, Objective, OptimizerConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeRaster {
    pub t0_grid: Vec<f64>,
    pub t1_grid: Vec<f64>,
    /// energies[i][j] = E(t0_grid[i], t1_grid[j]).
    pub energies: Vec<Vec<f64>>,
    pub p_x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub i: usize,
    pub j: usize,
    pub t0: f64,
    pub t1: f64,
    pub energy: f64,
}

/// A grid local minimum and the barrier separating it from a deeper one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Basin {
    pub minimum: GridPoint,
    /// Infinite for the global minimum.
    pub depth: f64,
}

/// `n` points −π + 2πk/n: one full period without the duplicated endpoint.
pub fn periodic_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| -PI + 2.0 * PI * k as f64 / n as f64).collect()
}

/// Grid over [−π, π) with spacing as close to `step` as the period allows.
pub fn periodic_grid_with_step(step: f64) -> Vec<f64> {
    periodic_grid((2.0 * PI / step).round() as usize)
}

fn dimer2_context(p_x: f64) -> Result<CostContext> {
    CostContext::new(AnsatzVariant::Dimer2, &SpinChainSpec::unit(2), NoiseModel::bit_flip(p_x))
}

/// DIMER2 cost of the unit dimer on every grid point.
pub fn landscape_raster(t0_grid: &[f64], t1_grid: &[f64], p_x: f64) -> Result<LandscapeRaster> {
    landscape_raster_for(&dimer2_context(p_x)?, t0_grid, t1_grid)
}

/// Raster of any two-parameter context.
pub fn landscape_raster_for(ctx: &CostContext, t0_grid: &[f64], t1_grid: &[f64]) -> Result<LandscapeRaster> {
    if t0_grid.is_empty() || t1_grid.is_empty() {
        return Err(Error::Config("landscape grids must be non-empty".into()));
    }
    if ctx.num_params() != 2 {
        return Err(Error::ParameterCount {
            expected: 2,
            actual: ctx.num_params(),
        });
    }
    let energies = t0_grid
        .par_iter()
        .map(|&t0| t1_grid.iter().map(|&t1| energy(ctx, &[t0, t1])).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(LandscapeRaster {
        t0_grid: t0_grid.to_vec(),
        t1_grid: t1_grid.to_vec(),
        energies,
        p_x: ctx.noise().p_x,
    })
}

impl LandscapeRaster {
    fn point(&self, i: usize, j: usize) -> GridPoint {
        GridPoint {
            i,
            j,
            t0: self.t0_grid[i],
            t1: self.t1_grid[j],
            energy: self.energies[i][j],
        }
    }

    /// Lowest grid value (first in row-major order on ties).
    pub fn argmin(&self) -> GridPoint {
        let mut best = (0, 0);
        for (i, row) in self.energies.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                if e < self.energies[best.0][best.1] {
                    best = (i, j);
                }
            }
        }
        self.point(best.0, best.1)
    }

    /// Basins deeper than `min_depth`, sorted by energy.
    ///
    /// The grids are taken as periodic (as from `periodic_grid`), so
    /// 2π-translates of a minimum are the same basin. Each grid minimum is
    /// followed as the level rises until it merges with a region holding a
    /// lower minimum; the level difference is its depth.
    pub fn basins(&self, min_depth: f64) -> Vec<Basin> {
        let (n0, n1) = (self.t0_grid.len(), self.t1_grid.len());
        let idx = |i: usize, j: usize| i * n1 + j;
        let mut order: Vec<usize> = (0..n0 * n1).collect();
        let e = |k: usize| self.energies[k / n1][k % n1];
        order.sort_by(|&a, &b| e(a).total_cmp(&e(b)).then(a.cmp(&b)));

        let mut parent: Vec<usize> = (0..n0 * n1).collect();
        let mut added = vec![false; n0 * n1];
        // Lowest cell of each component, stored at the root.
        let lowest: Vec<usize> = (0..n0 * n1).collect();
        let mut deaths: Vec<(usize, f64)> = Vec::new();

        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }

        for &k in &order {
            added[k] = true;
            let (i, j) = (k / n1, k % n1);
            let mut roots: Vec<usize> = Vec::new();
            for di in [n0 - 1, 0, 1] {
                for dj in [n1 - 1, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let nb = idx((i + di) % n0, (j + dj) % n1);
                    if added[nb] {
                        let r = find(&mut parent, nb);
                        if !roots.contains(&r) {
                            roots.push(r);
                        }
                    }
                }
            }
            if roots.is_empty() {
                continue;
            }
            roots.sort_by(|&a, &b| e(lowest[a]).total_cmp(&e(lowest[b])).then(lowest[a].cmp(&lowest[b])));
            let keep = roots[0];
            for &r in &roots[1..] {
                deaths.push((lowest[r], e(k) - e(lowest[r])));
                parent[r] = keep;
            }
            parent[k] = keep;
        }

        let global = order[0];
        let mut basins: Vec<Basin> = deaths
            .into_iter()
            .filter(|&(_, d)| d > min_depth)
            .map(|(m, depth)| Basin {
                minimum: self.point(m / n1, m % n1),
                depth,
            })
            .collect();
        basins.push(Basin {
            minimum: self.point(global / n1, global % n1),
            depth: f64::INFINITY,
        });
        basins.sort_by(|a, b| a.minimum.energy.total_cmp(&b.minimum.energy));
        basins
    }

    pub fn to_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t0", "t1", "energy"])?;
        for (i, row) in self.energies.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                w.write_record([
                    self.t0_grid[i].to_string(),
                    self.t1_grid[j].to_string(),
                    e.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// A refined DIMER2 minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimerMinimum {
    pub theta: [f64; 2],
    pub energy: f64,
    pub converged: bool,
}

/// Polishes the grid minima of the `count` lowest basins with L-BFGS.
pub fn refine_basins(
    ctx: &CostContext,
    basins: &[Basin],
    count: usize,
    config: &OptimizerConfig,
) -> Vec<DimerMinimum> {
    let obj = EnergyObjective::new(ctx, CostKind::Exact);
    basins
        .iter()
        .take(count)
        .map(|b| {
            let r = local_minimize(&obj, &[b.minimum.t0, b.minimum.t1], config, 0);
            let theta = crate::ansatz::wrap_angles(&r.theta_final);
            DimerMinimum {
                theta: [theta[0], theta[1]],
                energy: obj.value(&theta),
                converged: r.converged,
            }
        })
        .collect()
}

/// The two lowest noiseless DIMER2 minima (minimum 1, minimum 2), located on
/// an `n`×`n` periodic raster and refined.
pub fn dimer2_minima(n: usize) -> Result<(DimerMinimum, DimerMinimum)> {
    let ctx = dimer2_context(0.0)?;
    let grid = periodic_grid(n);
    let raster = landscape_raster_for(&ctx, &grid, &grid)?;
    let basins = raster.basins(1e-3);
    let mut found = refine_basins(&ctx, &basins, 2, &OptimizerConfig::default()).into_iter();
    match (found.next(), found.next()) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::Numerical("fewer than two landscape basins".into())),
    }
}
