//! Locating the noise-induced switch of the global minimum in a scan.
//!
//! Continuation: every row's best solution is warm-started at the next row
//! and the next row's best back at this one. Where either ends above the
//! best of the row it was moved to, the best solution has switched branch
//! between the two rows.
//! The switch with the largest overlap change (largest slope difference
//! without a ground truth) seeds two full sweeps: branch L from the best
//! solution just below the switch and branch H from the one just above,
//! each warm-started outward in both directions. Where L and H land in the
//! same basin (|L − H| at most the merge tolerance) the second branch does
//! not exist. The threshold is the change of the lower branch nearest the
//! seed: a sign change of L − H is interpolated linearly; a branch that
//! appears or vanishes between two grid points is extrapolated linearly
//! from its two nearest points and clamped to that grid interval.
//!
//! Seeding at the switch rather than at the ends of the grid matters for
//! long chains: at p_x = 0 the ansatz reaches the ground state on a whole
//! manifold of parameters, and a sweep started from an arbitrary point of it
//! does not follow the branch that noise selects.
//!
//! Distribution crossover: cluster means are linked row to row into tracks
//! by linear prediction, and the threshold is where the track holding the
//! lowest cluster changes, located the same way.
//!
//! With fewer than two persistent branches both methods fall back to the
//! largest second difference of the best-energy curve, reported only when it
//! stands out from the typical curvature of the scan.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scan::ScanTable;
use crate::cost::{CostContext, CostKind, EnergyObjective};
use crate::error::{Error, Result};
use crate::optimize::{local_minimize, Objective, OptimizerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransitionMethod {
    Continuation,
    DistributionCrossover,
    /// Fallback when fewer than two persistent branches were found.
    SlopeChange,
}

impl fmt::Display for TransitionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Continuation => "continuation",
            Self::DistributionCrossover => "distribution-crossover",
            Self::SlopeChange => "slope-change",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionSettings {
    /// Branch energies closer than this are treated as the same basin.
    pub merge_tolerance: f64,
    /// Slope fallback reports a kink only if its second difference exceeds
    /// this multiple of the median second difference.
    pub kink_ratio: f64,
}

impl Default for TransitionSettings {
    fn default() -> Self {
        Self {
            merge_tolerance: 1e-4,
            kink_ratio: 4.0,
        }
    }
}

/// Branch curves from warm-started continuation, aligned with the scan rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchCurves {
    pub p_x: Vec<f64>,
    /// Swept from the best solution of row `seed`.
    pub low_branch: Vec<f64>,
    /// Swept from the best solution of row `seed + 1`.
    pub high_branch: Vec<f64>,
    pub seed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub threshold_px: Option<f64>,
    /// threshold_px · n_ℓ · N.
    pub threshold_scaled: Option<f64>,
    /// Slope of the branch that is lowest below the threshold.
    pub branch_low_slope: f64,
    /// Slope of the branch that is lowest above the threshold.
    pub branch_high_slope: f64,
    pub method: TransitionMethod,
    pub requested: TransitionMethod,
    pub curves: Option<BranchCurves>,
}

/// Local minimum warm-started from `theta` at row `i`.
fn settle(contexts: &[CostContext], kind: CostKind, config: &OptimizerConfig, i: usize, theta: &[f64]) -> (f64, Vec<f64>) {
    let obj = EnergyObjective::new(&contexts[i], kind);
    let rec = local_minimize(&obj, theta, config, 0);
    (obj.value(&rec.theta_final), rec.theta_final)
}

/// A switch of the best solution between rows `i` and `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Switch {
    i: usize,
    score: f64,
}

fn find_switches(table: &ScanTable, contexts: &[CostContext], config: &OptimizerConfig, tol: f64) -> Vec<Switch> {
    let kind = table.metadata.cost;
    let rows = &table.rows;
    let dp = |i: usize| rows[i + 1].p_x - rows[i].p_x;
    (0..rows.len() - 1)
        .into_par_iter()
        .filter_map(|i| {
            let (ahead, _) = settle(contexts, kind, config, i + 1, rows[i].best_theta());
            let (behind, _) = settle(contexts, kind, config, i, rows[i + 1].best_theta());
            // One side suffices: a branch that appears or vanishes between the
            // rows slides into the other one when warm-started across.
            if ahead <= rows[i + 1].best_energy + tol && behind <= rows[i].best_energy + tol {
                return None;
            }
            let score = if contexts[i].ground_truth().is_some() {
                (rows[i].best_overlap - rows[i + 1].best_overlap).abs()
            } else {
                let low = (ahead - rows[i].best_energy) / dp(i);
                let high = (rows[i + 1].best_energy - behind) / dp(i);
                (low - high).abs()
            };
            Some(Switch { i, score })
        })
        .collect()
}

/// Sweeps outward in both directions from row `start`.
fn sweep(contexts: &[CostContext], kind: CostKind, config: &OptimizerConfig, start: usize, theta: &[f64]) -> Vec<f64> {
    let n = contexts.len();
    let mut out = vec![0.0; n];
    let (e, th) = settle(contexts, kind, config, start, theta);
    out[start] = e;
    let mut t = th.clone();
    for i in start + 1..n {
        let (e, next) = settle(contexts, kind, config, i, &t);
        out[i] = e;
        t = next;
    }
    let mut t = th;
    for i in (0..start).rev() {
        let (e, next) = settle(contexts, kind, config, i, &t);
        out[i] = e;
        t = next;
    }
    out
}

/// Branch curves seeded at the most pronounced switch of the best solution,
/// or None when the best solution never changes branch.
pub fn continue_branches(
    table: &ScanTable,
    config: &OptimizerConfig,
    settings: &TransitionSettings,
) -> Result<Option<BranchCurves>> {
    let n = table.rows.len();
    if n < 2 {
        return Err(Error::Config("continuation needs at least 2 rows".into()));
    }
    let contexts = table
        .rows
        .iter()
        .map(|r| table.context(r.p_x))
        .collect::<Result<Vec<_>>>()?;
    let switches = find_switches(table, &contexts, config, settings.merge_tolerance);
    // Ties go to the lowest p_x.
    let Some(seed) = switches
        .iter()
        .fold(None::<Switch>, |best, s| match best {
            Some(b) if b.score >= s.score => Some(b),
            _ => Some(*s),
        })
        .map(|s| s.i)
    else {
        return Ok(None);
    };
    let kind = table.metadata.cost;
    let mut curves: Vec<Vec<f64>> = [seed, seed + 1]
        .into_par_iter()
        .map(|k| sweep(&contexts, kind, config, k, table.rows[k].best_theta()))
        .collect();
    let high_branch = curves.pop().expect("two sweeps");
    let low_branch = curves.pop().expect("two sweeps");
    Ok(Some(BranchCurves {
        p_x: table.px(),
        low_branch,
        high_branch,
        seed,
    }))
}

/// Zero of the line through (x0, y0), (x1, y1), clamped to [lo, hi].
fn line_zero(x0: f64, y0: f64, x1: f64, y1: f64, lo: f64, hi: f64) -> f64 {
    let x = if y1 == y0 { 0.5 * (lo + hi) } else { x0 - y0 * (x1 - x0) / (y1 - y0) };
    x.clamp(lo, hi)
}

/// Least-squares slope; 0 for fewer than two points.
fn slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Crossing of two partially defined curves `a` (lowest before) and `b`
/// (lowest after) between grid indices `i` and `i + 1`.
fn crossing(px: &[f64], a: &[Option<f64>], b: &[Option<f64>], i: usize) -> f64 {
    let (lo, hi) = (px[i], px[i + 1]);
    // Value of a curve at index k, extrapolating linearly from its nearest
    // defined neighbours when undefined there.
    let value_at = |c: &[Option<f64>], k: usize| -> Option<f64> {
        if let Some(v) = c[k] {
            return Some(v);
        }
        let mut near: Vec<usize> = (0..c.len()).filter(|&j| c[j].is_some()).collect();
        near.sort_by_key(|&j| (j as isize - k as isize).unsigned_abs());
        match near.as_slice() {
            [] => None,
            [j] => c[*j],
            [j0, j1, ..] => {
                let (x0, y0, x1, y1) = (px[*j0], c[*j0]?, px[*j1], c[*j1]?);
                Some(y0 + (y1 - y0) * (px[k] - x0) / (x1 - x0))
            }
        }
    };
    match (value_at(a, i), value_at(b, i), value_at(a, i + 1), value_at(b, i + 1)) {
        (Some(a0), Some(b0), Some(a1), Some(b1)) => line_zero(lo, a0 - b0, hi, a1 - b1, lo, hi),
        _ => 0.5 * (lo + hi),
    }
}

/// Which continuation branch is lower at each row: Some(false) L,
/// Some(true) H, None when merged.
fn lower_branch(curves: &BranchCurves, tol: f64) -> Vec<Option<bool>> {
    curves
        .low_branch
        .iter()
        .zip(&curves.high_branch)
        .map(|(f, b)| {
            let d = f - b;
            if d.abs() <= tol {
                None
            } else {
                Some(d > 0.0)
            }
        })
        .collect()
}

fn from_continuation(
    table: &ScanTable,
    curves: BranchCurves,
    settings: &TransitionSettings,
) -> Option<TransitionReport> {
    let px = &curves.p_x;
    let n = px.len();
    let state = lower_branch(&curves, settings.merge_tolerance);
    if state.iter().all(|s| s.is_none()) {
        return None;
    }
    // In a merged prefix H has slid into L (it does not exist there); in a
    // merged suffix the reverse.
    let first = state.iter().position(|s| s.is_some()).expect("some distinct row");
    let last = state.iter().rposition(|s| s.is_some()).expect("some distinct row");
    let fwd: Vec<Option<f64>> = (0..n)
        .map(|k| (k <= last || state[k].is_some()).then_some(curves.low_branch[k]))
        .collect();
    let bwd: Vec<Option<f64>> = (0..n)
        .map(|k| (k >= first || state[k].is_some()).then_some(curves.high_branch[k]))
        .collect();
    // true where H is the lower one.
    let mut winner = Vec::with_capacity(n);
    for k in 0..n {
        let w = match state[k] {
            Some(w) => w,
            None if k < first => false,
            None if k > last => true,
            None => winner[k - 1],
        };
        winner.push(w);
    }
    let switch = (0..n - 1)
        .filter(|&i| winner[i] != winner[i + 1])
        .min_by_key(|&i| i.abs_diff(curves.seed));
    let threshold = switch.map(|i| {
        let (lo_curve, hi_curve) = if winner[i] { (&bwd, &fwd) } else { (&fwd, &bwd) };
        crossing(px, lo_curve, hi_curve, i)
    });
    let (low_pts, high_pts): (Vec<(f64, f64)>, Vec<(f64, f64)>) = match threshold {
        Some(t) => (
            (0..n)
                .filter(|&k| px[k] < t)
                .map(|k| (px[k], curves.low_branch[k]))
                .collect(),
            (0..n)
                .filter(|&k| px[k] > t)
                .map(|k| (px[k], curves.high_branch[k]))
                .collect(),
        ),
        None => {
            let best: Vec<(f64, f64)> = px.iter().copied().zip(table.best_energies()).collect();
            (best.clone(), best)
        }
    };
    Some(TransitionReport {
        threshold_px: threshold,
        threshold_scaled: threshold.map(|t| t * table.metadata.noise_scale),
        branch_low_slope: slope(&low_pts),
        branch_high_slope: slope(&high_pts),
        method: TransitionMethod::Continuation,
        requested: TransitionMethod::Continuation,
        curves: Some(curves),
    })
}

/// Cluster-mean tracks linked across rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTracks {
    /// tracks[t][row] = cluster mean energy, if the track is present there.
    pub tracks: Vec<Vec<Option<f64>>>,
    /// Track holding the lowest cluster in each row.
    pub lowest: Vec<usize>,
}

pub fn link_cluster_tracks(table: &ScanTable, settings: &TransitionSettings) -> ClusterTracks {
    let n = table.rows.len();
    let px = table.px();
    let mut tracks: Vec<Vec<Option<f64>>> = Vec::new();
    let mut lowest = Vec::with_capacity(n);
    for (k, row) in table.rows.iter().enumerate() {
        let means = row.branch_energies();
        let mut claimed = vec![false; means.len()];
        let mut assignment: Vec<Option<usize>> = vec![None; tracks.len()];
        // Predict every live track (present in the previous row). Without a
        // slope yet, accept anything closer than half the gap to the
        // neighbouring clusters of the previous row.
        let prev_means: Vec<f64> = if k > 0 { table.rows[k - 1].branch_energies() } else { vec![] };
        let mut preds: Vec<(usize, f64, f64)> = Vec::new();
        for (t, tr) in tracks.iter().enumerate() {
            let Some(prev) = (k > 0).then(|| tr[k - 1]).flatten() else {
                continue;
            };
            let floor = 10.0 * settings.merge_tolerance;
            let (pred, window) = match (k > 1).then(|| tr[k - 2]).flatten() {
                Some(pp) => {
                    let s = (prev - pp) / (px[k - 1] - px[k - 2]) * (px[k] - px[k - 1]);
                    (prev + s, (0.25 * s.abs()).max(floor))
                }
                None => {
                    let gap = prev_means
                        .iter()
                        .map(|m| (m - prev).abs())
                        .filter(|&d| d > 0.0)
                        .fold(f64::INFINITY, f64::min);
                    (prev, if gap.is_finite() { (0.5 * gap).max(floor) } else { f64::INFINITY })
                }
            };
            preds.push((t, pred, window));
        }
        // Greedy matching, closest pairs first.
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for &(t, pred, window) in &preds {
            for (c, &m) in means.iter().enumerate() {
                let d = (m - pred).abs();
                if d <= window {
                    pairs.push((d, t, c));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        for (_, t, c) in pairs {
            if assignment[t].is_none() && !claimed[c] {
                assignment[t] = Some(c);
                claimed[c] = true;
            }
        }
        for tr in tracks.iter_mut() {
            tr.push(None);
        }
        for (t, a) in assignment.iter().enumerate() {
            if let Some(c) = a {
                tracks[t][k] = Some(means[*c]);
            }
        }
        for (c, &m) in means.iter().enumerate() {
            if !claimed[c] {
                let mut tr = vec![None; k + 1];
                tr[k] = Some(m);
                tracks.push(tr);
            }
        }
        let low = tracks
            .iter()
            .enumerate()
            .filter_map(|(t, tr)| tr[k].map(|v| (t, v)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(t, _)| t)
            .unwrap_or(0);
        lowest.push(low);
    }
    ClusterTracks { tracks, lowest }
}

fn from_distribution(table: &ScanTable, settings: &TransitionSettings) -> Option<TransitionReport> {
    let px = table.px();
    let linked = link_cluster_tracks(table, settings);
    let persistent = linked
        .tracks
        .iter()
        .filter(|tr| tr.iter().filter(|v| v.is_some()).count() >= 2)
        .count();
    if persistent < 2 {
        return None;
    }
    let switch = linked.lowest.windows(2).position(|w| w[0] != w[1]);
    let threshold = switch.map(|i| {
        let a = &linked.tracks[linked.lowest[i]];
        let b = &linked.tracks[linked.lowest[i + 1]];
        crossing(&px, a, b, i)
    });
    let points = |t: usize, keep: &dyn Fn(f64) -> bool| -> Vec<(f64, f64)> {
        linked.tracks[t]
            .iter()
            .zip(&px)
            .filter_map(|(v, &p)| v.filter(|_| keep(p)).map(|v| (p, v)))
            .collect()
    };
    let (low, high) = match (switch, threshold) {
        (Some(i), Some(t)) => (
            points(linked.lowest[i], &|p| p < t),
            points(linked.lowest[i + 1], &|p| p > t),
        ),
        _ => {
            let all = points(linked.lowest[0], &|_| true);
            (all.clone(), all)
        }
    };
    Some(TransitionReport {
        threshold_px: threshold,
        threshold_scaled: threshold.map(|t| t * table.metadata.noise_scale),
        branch_low_slope: slope(&low),
        branch_high_slope: slope(&high),
        method: TransitionMethod::DistributionCrossover,
        requested: TransitionMethod::DistributionCrossover,
        curves: None,
    })
}

/// Largest second difference of the best-energy curve, if it stands out.
fn from_slope_change(table: &ScanTable, settings: &TransitionSettings) -> TransitionReport {
    let px = table.px();
    let e = table.best_energies();
    let n = e.len();
    let second: Vec<f64> = (1..n.saturating_sub(1))
        .map(|k| {
            let s0 = (e[k] - e[k - 1]) / (px[k] - px[k - 1]);
            let s1 = (e[k + 1] - e[k]) / (px[k + 1] - px[k]);
            (s1 - s0).abs()
        })
        .collect();
    let mut sorted = second.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted.get(sorted.len() / 2).copied().unwrap_or(0.0);
    let kink = second
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .filter(|(_, &v)| v > settings.kink_ratio * median && v > 0.0)
        .map(|(k, _)| k + 1);
    let pts: Vec<(f64, f64)> = px.iter().copied().zip(e.iter().copied()).collect();
    let (low, high) = match kink {
        Some(k) => (pts[..=k].to_vec(), pts[k..].to_vec()),
        None => (pts.clone(), pts),
    };
    let threshold = kink.map(|k| px[k]);
    TransitionReport {
        threshold_px: threshold,
        threshold_scaled: threshold.map(|t| t * table.metadata.noise_scale),
        branch_low_slope: slope(&low),
        branch_high_slope: slope(&high),
        method: TransitionMethod::SlopeChange,
        requested: TransitionMethod::SlopeChange,
        curves: None,
    }
}

/// Threshold of the switch between the two lowest branches. Continuation
/// re-optimizes with `config` (only its local-search settings are used).
pub fn detect_transition(
    table: &ScanTable,
    method: TransitionMethod,
    config: &OptimizerConfig,
    settings: &TransitionSettings,
) -> Result<TransitionReport> {
    if table.rows.len() < 4 {
        return Err(Error::Config(format!(
            "transition detection needs at least 4 rows, got {}",
            table.rows.len()
        )));
    }
    let found = match method {
        TransitionMethod::Continuation => {
            continue_branches(table, config, settings)?.and_then(|c| from_continuation(table, c, settings))
        }
        TransitionMethod::DistributionCrossover => from_distribution(table, settings),
        TransitionMethod::SlopeChange => None,
    };
    let mut report = found.unwrap_or_else(|| from_slope_change(table, settings));
    report.requested = method;
    Ok(report)
}
