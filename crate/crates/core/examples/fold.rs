//! Noise amplification by CNOT folding: energies of the two noiseless dimer
//! minima as the fold count grows.
//!
//! cargo run --release --example fold -- [p2] [m_max]

use noisy_vqe::explab::{dimer2_minima, fold_experiment_with};
use noisy_vqe::CnotNoise;

fn main() -> noisy_vqe::Result<()> {
    let mut args = std::env::args().skip(1);
    let p2: f64 = args.next().map_or(5e-3, |s| s.parse().expect("p2"));
    let m_max: usize = args.next().map_or(80, |s| s.parse().expect("m_max"));

    let (min1, min2) = dimer2_minima(400)?;
    println!("minimum 1: {:.8} at {:?}", min1.energy, min1.theta);
    println!("minimum 2: {:.8} at {:?}", min2.energy, min2.theta);

    let ms: Vec<usize> = (0..=m_max).collect();
    for kind in [CnotNoise::LocalDepolarizing, CnotNoise::BitFlip, CnotNoise::Depolarizing2] {
        let r = fold_experiment_with(&min1.theta, &min2.theta, &ms, p2, kind)?;
        let (s1, s2) = r.pre_crossover_slopes();
        println!(
            "{kind:?}: crossover_m = {:?}, slopes {s1:.3e} / {s2:.3e}, E(m={m_max}) = {:.5} / {:.5}",
            r.crossover_m,
            r.energy_min1[m_max],
            r.energy_min2[m_max]
        );
    }
    Ok(())
}
