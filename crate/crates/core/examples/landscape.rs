//! Two-parameter dimer landscape: grid minimum, basins and refined minima.
//!
//! cargo run --release --example landscape -- [grid] [p_x]

use noisy_vqe::cost::CostContext;
use noisy_vqe::explab::{landscape_raster_for, periodic_grid, refine_basins};
use noisy_vqe::{AnsatzVariant, NoiseModel, OptimizerConfig, SpinChainSpec};

fn main() -> noisy_vqe::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(200, |s| s.parse().expect("grid size"));
    let p_x: f64 = args.next().map_or(0.0, |s| s.parse().expect("p_x"));

    let ctx = CostContext::new(AnsatzVariant::Dimer2, &SpinChainSpec::unit(2), NoiseModel::bit_flip(p_x))?;
    let grid = periodic_grid(n);
    let raster = landscape_raster_for(&ctx, &grid, &grid)?;
    let a = raster.argmin();
    println!("{n}x{n} raster at p_x = {p_x}: grid minimum {:.8} at ({:.4}, {:.4})", a.energy, a.t0, a.t1);

    let basins = raster.basins(1e-3);
    let refined = refine_basins(&ctx, &basins, basins.len(), &OptimizerConfig::default());
    for (k, (b, r)) in basins.iter().zip(&refined).enumerate() {
        println!(
            "minimum {}: grid {:.6}, refined {:.10} at ({:+.6}, {:+.6}), barrier {:.4}",
            k + 1,
            b.minimum.energy,
            r.energy,
            r.theta[0],
            r.theta[1],
            b.depth
        );
    }
    Ok(())
}
