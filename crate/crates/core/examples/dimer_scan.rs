//! Bit-flip scan of the eight-parameter dimer ansatz and the switch between
//! its two minima.
//!
//! cargo run --release --example dimer_scan -- [starts] [dimer8|dimer2]

use noisy_vqe::explab::{detect_transition, linspace, scan_noise, TransitionMethod, TransitionSettings};
use noisy_vqe::{AnsatzVariant, OptimizerConfig, SpinChainSpec};

fn main() -> noisy_vqe::Result<()> {
    let mut args = std::env::args().skip(1);
    let starts: usize = args.next().map_or(128, |s| s.parse().expect("starts"));
    let variant: AnsatzVariant = args.next().as_deref().unwrap_or("dimer8").parse()?;

    let config = OptimizerConfig::default().with_starts(starts).with_seed(7);
    let table = scan_noise(variant, &SpinChainSpec::unit(2), &linspace(0.0, 0.12, 25), &config)?;
    println!("{:>7} {:>14} {:>8} {:>9}", "p_x", "best", "overlap", "clusters");
    for r in &table.rows {
        println!("{:>7.3} {:>14.10} {:>8.4} {:>9}", r.p_x, r.best_energy, r.best_overlap, r.branches.len());
    }

    let settings = TransitionSettings::default();
    for method in [TransitionMethod::Continuation, TransitionMethod::DistributionCrossover] {
        let t = detect_transition(&table, method, &config, &settings)?;
        match t.threshold_px {
            Some(p) => println!(
                "{method}: threshold p_x = {p:.5} (reported by {}), slopes {:.3} / {:.3}",
                t.method, t.branch_low_slope, t.branch_high_slope
            ),
            None => println!("{method}: no threshold (reported by {})", t.method),
        }
    }
    Ok(())
}
