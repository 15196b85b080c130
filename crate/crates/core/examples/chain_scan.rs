//! Bit-flip scan of a longer chain on the scaled axis p_x·n_layers·N.
//!
//! cargo run --release --example chain_scan -- [N] [layers] [starts] [steps]
//!
//! N = 5 with 4 layers and 32 starts takes several minutes on one core.

use noisy_vqe::explab::{detect_transition, scaled_grid, scan_noise, TransitionMethod, TransitionSettings};
use noisy_vqe::{AnsatzVariant, OptimizerConfig, SpinChainSpec};

fn main() -> noisy_vqe::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|s| s.parse().expect("integer")).collect();
    let n = args.first().copied().unwrap_or(3);
    let layers = args.get(1).copied().unwrap_or(2);
    let starts = args.get(2).copied().unwrap_or(32);
    let steps = args.get(3).copied().unwrap_or(25);

    let variant = AnsatzVariant::General {
        num_qubits: n,
        num_layers: layers,
    };
    let config = OptimizerConfig::default().with_starts(starts).with_seed(7);
    let grid = scaled_grid(variant, 0.0, 0.5, steps);
    let table = scan_noise(variant, &SpinChainSpec::unit(n), &grid, &config)?;
    println!("{variant}: {} parameters", variant.num_params());
    println!("{:>8} {:>14} {:>8} {:>9}", "scaled", "best", "overlap", "clusters");
    for r in &table.rows {
        println!("{:>8.4} {:>14.8} {:>8.4} {:>9}", r.scaled_px, r.best_energy, r.best_overlap, r.branches.len());
    }
    let t = detect_transition(&table, TransitionMethod::Continuation, &config, &TransitionSettings::default())?;
    match t.threshold_scaled {
        Some(s) => println!("threshold at p_x·n_l·N = {s:.4} ({})", t.method),
        None => println!("no transition ({})", t.method),
    }
    Ok(())
}
