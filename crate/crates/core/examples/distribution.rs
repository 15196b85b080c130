//! Solution distribution of the multi-start optimizer: how the random
//! starts split over the minima at a few bit-flip rates.
//!
//! cargo run --release --example distribution -- [dimer2|dimer8] [starts]

use noisy_vqe::cost::{CostContext, CostKind};
use noisy_vqe::optimize::{cluster_solutions, multi_start};
use noisy_vqe::{AnsatzVariant, NoiseModel, OptimizerConfig, SpinChainSpec};

fn main() -> noisy_vqe::Result<()> {
    let mut args = std::env::args().skip(1);
    let variant: AnsatzVariant = args.next().as_deref().unwrap_or("dimer2").parse()?;
    let starts: usize = args.next().map_or(128, |s| s.parse().expect("starts"));
    let config = OptimizerConfig::default().with_starts(starts).with_seed(11);
    let base = CostContext::new(variant, &SpinChainSpec::unit(2), NoiseModel::noiseless())?;

    for p_x in [0.0, 0.05, 0.085, 0.095, 0.12] {
        let ctx = base.with_noise(NoiseModel::bit_flip(p_x))?;
        let set = multi_start(&ctx, CostKind::Exact, &config)?;
        let clusters = cluster_solutions(&set, 1e-4);
        let summary: Vec<String> = clusters
            .clusters
            .iter()
            .map(|c| format!("{:.5} ({})", c.mean_energy, c.size()))
            .collect();
        println!("p_x = {p_x:<6} {}", summary.join("  "));
    }
    Ok(())
}
