//! The optimizer on its own: L-BFGS and multi-start on a plain function.

use noisy_vqe::optimize::{cluster_solutions, local_minimize, multi_start_objective, FnObjective};
use noisy_vqe::OptimizerConfig;

fn main() -> noisy_vqe::Result<()> {
    // Rosenbrock valley.
    let rosen = FnObjective::new(
        2,
        |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
        |x: &[f64]| {
            vec![
                -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
                200.0 * (x[1] - x[0] * x[0]),
            ]
        },
    );
    let r = local_minimize(&rosen, &[-1.2, 1.0], &OptimizerConfig::default(), 0);
    println!(
        "rosenbrock: x = ({:.10}, {:.10}) after {} iterations, converged = {}",
        r.theta_final[0], r.theta_final[1], r.iterations, r.converged
    );

    // Periodic function with three minima per period in each direction.
    let wells = FnObjective::new(
        2,
        |x: &[f64]| (3.0 * x[0]).cos() + 0.2 * x[0].sin() + (3.0 * x[1]).cos(),
        |x: &[f64]| vec![-3.0 * (3.0 * x[0]).sin() + 0.2 * x[0].cos(), -3.0 * (3.0 * x[1]).sin()],
    );
    let set = multi_start_objective(&wells, &OptimizerConfig::default().with_starts(64))?;
    for c in cluster_solutions(&set, 1e-6).clusters {
        println!("cluster {:+.8}: {} starts", c.mean_energy, c.size());
    }
    Ok(())
}
