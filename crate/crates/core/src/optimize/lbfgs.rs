//! Limited-memory BFGS with a strong-Wolfe line search (bracketing plus
//! cubic-interpolation zoom).

use std::collections::VecDeque;

use super::{Objective, OptimizerConfig, SolutionRecord};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + alpha * b).collect()
}

#[derive(Debug, Clone)]
struct Trial {
    alpha: f64,
    f: f64,
    g: Vec<f64>,
    dphi: f64,
}

/// Minimizer of the cubic through (x1, f1, g1), (x2, f2, g2), clamped to
/// `bounds`; falls back to bisection when the cubic has no real minimizer.
fn cubic_interpolate(x1: f64, f1: f64, g1: f64, x2: f64, f2: f64, g2: f64, bounds: (f64, f64)) -> f64 {
    let (lo, hi) = bounds;
    let d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
    let d2_sq = d1 * d1 - g1 * g2;
    if d2_sq >= 0.0 {
        let d2 = d2_sq.sqrt();
        let x = if x1 <= x2 {
            x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
        } else {
            x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2))
        };
        if x.is_finite() {
            return x.clamp(lo, hi);
        }
    }
    0.5 * (lo + hi)
}

enum LineSearch {
    /// Strong Wolfe conditions hold.
    Accepted(Trial),
    /// Sufficient decrease holds but curvature could not be satisfied.
    Decrease(Trial),
    Failed,
}

struct LineSearchParams {
    c1: f64,
    c2: f64,
    max_evals: usize,
}

fn strong_wolfe(
    obj: &dyn Objective,
    x: &[f64],
    f0: f64,
    dphi0: f64,
    d: &[f64],
    alpha0: f64,
    p: &LineSearchParams,
) -> LineSearch {
    let eval = |alpha: f64| -> Trial {
        let (f, g) = obj.value_and_gradient(&axpy(x, alpha, d));
        let dphi = dot(&g, d);
        Trial { alpha, f, g, dphi }
    };
    let armijo = |t: &Trial| t.f <= f0 + p.c1 * t.alpha * dphi0;
    let curvature = |t: &Trial| t.dphi.abs() <= -p.c2 * dphi0;

    let mut prev = Trial {
        alpha: 0.0,
        f: f0,
        g: Vec::new(),
        dphi: dphi0,
    };
    let mut cur = eval(alpha0);
    let mut evals = 1;

    let (mut lo, mut hi) = loop {
        if !cur.f.is_finite() {
            // Step into a non-finite region: shrink.
            if evals >= p.max_evals {
                return LineSearch::Failed;
            }
            cur = eval(0.5 * (prev.alpha + cur.alpha));
            evals += 1;
            continue;
        }
        if !armijo(&cur) || (evals > 1 && cur.f >= prev.f) {
            break (prev, cur);
        }
        if curvature(&cur) {
            return LineSearch::Accepted(cur);
        }
        if cur.dphi >= 0.0 {
            break (cur, prev);
        }
        if evals >= p.max_evals {
            return LineSearch::Decrease(cur);
        }
        let next = cubic_interpolate(
            prev.alpha,
            prev.f,
            prev.dphi,
            cur.alpha,
            cur.f,
            cur.dphi,
            (cur.alpha + 0.01 * (cur.alpha - prev.alpha), cur.alpha * 10.0),
        );
        prev = cur;
        cur = eval(next);
        evals += 1;
    };

    // Zoom: `lo` satisfies sufficient decrease with the lowest value so far.
    let d_scale = inf_norm(d);
    while evals < p.max_evals {
        let width = (hi.alpha - lo.alpha).abs();
        if width * d_scale < 1e-16 {
            break;
        }
        let (a, b) = if lo.alpha < hi.alpha {
            (lo.alpha, hi.alpha)
        } else {
            (hi.alpha, lo.alpha)
        };
        let margin = 0.1 * (b - a);
        let alpha = if hi.g.is_empty() || lo.g.is_empty() && lo.alpha != 0.0 {
            0.5 * (a + b)
        } else {
            cubic_interpolate(lo.alpha, lo.f, lo.dphi, hi.alpha, hi.f, hi.dphi, (a + margin, b - margin))
        };
        let t = eval(alpha);
        evals += 1;
        if !t.f.is_finite() || !armijo(&t) || t.f >= lo.f {
            hi = t;
        } else {
            if curvature(&t) {
                return LineSearch::Accepted(t);
            }
            if t.dphi * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = t;
        }
    }
    if lo.alpha > 0.0 && lo.f < f0 {
        LineSearch::Decrease(lo)
    } else {
        LineSearch::Failed
    }
}

/// Two-loop recursion: returns −H·g for the implicit inverse Hessian H.
fn lbfgs_direction(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

/// Unconstrained L-BFGS from `theta0`.
///
/// Stops when ‖∇f‖∞ ≤ `gradient_tolerance` (converged) or after
/// `max_iterations` iterations or a failed line search (not converged, best
/// iterate returned). Accepted iterates never increase f.
pub fn local_minimize(
    obj: &dyn Objective,
    theta0: &[f64],
    config: &OptimizerConfig,
    start_index: usize,
) -> SolutionRecord {
    let params = LineSearchParams {
        c1: config.wolfe_c1,
        c2: config.wolfe_c2,
        max_evals: config.max_line_search,
    };
    let mut x = theta0.to_vec();
    let (mut f, mut g) = obj.value_and_gradient(&x);
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    let mut converged = inf_norm(&g) <= config.gradient_tolerance;

    while !converged && iterations < config.max_iterations {
        let mut d = lbfgs_direction(&g, &memory);
        let mut dphi0 = dot(&g, &d);
        if !(dphi0 < 0.0) {
            memory.clear();
            d = g.iter().map(|v| -v).collect();
            dphi0 = dot(&g, &d);
        }
        let alpha0 = if memory.is_empty() {
            (1.0 / inf_norm(&g)).min(1.0)
        } else {
            1.0
        };
        let trial = match strong_wolfe(obj, &x, f, dphi0, &d, alpha0, &params) {
            LineSearch::Accepted(t) | LineSearch::Decrease(t) => t,
            LineSearch::Failed if !memory.is_empty() => {
                // Retry once along steepest descent with a fresh memory.
                memory.clear();
                d = g.iter().map(|v| -v).collect();
                dphi0 = dot(&g, &d);
                match strong_wolfe(obj, &x, f, dphi0, &d, (1.0 / inf_norm(&g)).min(1.0), &params) {
                    LineSearch::Accepted(t) | LineSearch::Decrease(t) => t,
                    LineSearch::Failed => break,
                }
            }
            LineSearch::Failed => break,
        };
        iterations += 1;
        let x_new = axpy(&x, trial.alpha, &d);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = trial.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            if memory.len() == config.memory_pairs {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        debug_assert!(trial.f <= f);
        x = x_new;
        f = trial.f;
        g = trial.g;
        converged = inf_norm(&g) <= config.gradient_tolerance;
    }

    SolutionRecord {
        gradient_norm: inf_norm(&g),
        theta_final: x,
        energy_final: f,
        start_index,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::FnObjective;

    fn rosenbrock() -> impl Objective {
        FnObjective::new(
            2,
            |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            |x: &[f64]| {
                vec![
                    -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
                    200.0 * (x[1] - x[0] * x[0]),
                ]
            },
        )
    }

    #[test]
    fn quadratic_in_one_dimension() {
        let obj = FnObjective::new(1, |x: &[f64]| (x[0] - 2.0).powi(2), |x: &[f64]| vec![2.0 * (x[0] - 2.0)]);
        let r = local_minimize(&obj, &[-5.0], &OptimizerConfig::default(), 0);
        assert!(r.converged);
        assert!((r.theta_final[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock_converges() {
        let r = local_minimize(&rosenbrock(), &[-1.2, 1.0], &OptimizerConfig::default(), 0);
        assert!(r.converged, "{r:?}");
        assert!((r.theta_final[0] - 1.0).abs() < 1e-6);
        assert!((r.theta_final[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn accepted_energies_never_increase() {
        use std::sync::Mutex;
        let accepted = Mutex::new(Vec::new());
        let cfg = OptimizerConfig {
            max_iterations: 1,
            ..OptimizerConfig::default()
        };
        let obj = rosenbrock();
        let mut x = vec![-1.5, 2.0];
        for _ in 0..60 {
            let r = local_minimize(&obj, &x, &cfg, 0);
            accepted.lock().unwrap().push(r.energy_final);
            x = r.theta_final;
        }
        let v = accepted.into_inner().unwrap();
        assert!(v.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let cfg = OptimizerConfig {
            max_iterations: 3,
            ..OptimizerConfig::default()
        };
        let r = local_minimize(&rosenbrock(), &[-1.2, 1.0], &cfg, 7);
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
        assert_eq!(r.start_index, 7);
    }

    #[test]
    fn inconsistent_gradient_fails_line_search() {
        // Gradient points uphill: no step can decrease f.
        let obj = FnObjective::new(1, |x: &[f64]| x[0] * x[0], |x: &[f64]| vec![-2.0 * x[0]]);
        let r = local_minimize(&obj, &[1.0], &OptimizerConfig::default(), 0);
        assert!(!r.converged);
        assert_eq!(r.energy_final, 1.0);
    }

    #[test]
    fn cubic_interpolation_finds_quadratic_minimum() {
        // f = (x − 1)², samples at 0 and 3.
        let x = cubic_interpolate(0.0, 1.0, -2.0, 3.0, 4.0, 4.0, (0.0, 3.0));
        assert!((x - 1.0).abs() < 1e-12);
    }
}
