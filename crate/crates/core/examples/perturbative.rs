//! First-order cost in the bit-flip rate against the exact noisy cost.

use noisy_vqe::cost::{energy, energy_perturbative, CostContext};
use noisy_vqe::optimize::start_point;
use noisy_vqe::{AnsatzVariant, NoiseModel, OptimizerConfig, SpinChainSpec};

fn gap(variant: AnsatzVariant, theta: &[f64], p_x: f64) -> noisy_vqe::Result<f64> {
    let chain = SpinChainSpec::unit(variant.num_qubits());
    let ctx = CostContext::new(variant, &chain, NoiseModel::bit_flip(p_x))?;
    Ok((energy(&ctx, theta)? - energy_perturbative(&ctx, theta, p_x)?).abs())
}

fn main() -> noisy_vqe::Result<()> {
    let cfg = OptimizerConfig::default().with_seed(5);

    // One layer: the channel acts once, so the expansion is exact.
    let theta = start_point(8, &cfg, 0);
    for p in [0.01, 0.05, 0.1, 0.5] {
        println!("dimer8  p_x = {p:<5} |E - E_pert| = {:.2e}", gap(AnsatzVariant::Dimer8, &theta, p)?);
    }

    // Four layers on five spins: the gap is second order in p_x.
    let chain = AnsatzVariant::General {
        num_qubits: 5,
        num_layers: 4,
    };
    let theta = start_point(chain.num_params(), &cfg, 1);
    let mut prev: Option<f64> = None;
    for p in [0.02, 0.01, 0.005, 0.0025] {
        let g = gap(chain, &theta, p)?;
        match prev {
            Some(q) => println!("{chain} p_x = {p:<6} gap = {g:.3e}  ratio {:.3}", q / g),
            None => println!("{chain} p_x = {p:<6} gap = {g:.3e}"),
        }
        prev = Some(g);
    }
    Ok(())
}
