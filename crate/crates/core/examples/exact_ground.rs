//! Exact ground energies of short Heisenberg chains.

use noisy_vqe::{build_hamiltonian, exact_ground, SpinChainSpec};

fn main() -> noisy_vqe::Result<()> {
    println!("{:>3} {:>20} {:>11}", "N", "E_g", "degeneracy");
    for n in 1..=6 {
        let h = build_hamiltonian(&SpinChainSpec::unit(n))?;
        let g = exact_ground(&h)?;
        println!("{n:>3} {:>20.14} {:>11}", g.energy, g.degeneracy());
    }

    // Pure exchange: the dimer ground state is the singlet.
    let h = build_hamiltonian(&SpinChainSpec::new(2, 1.0, 0.0)?)?;
    let g = exact_ground(&h)?;
    println!("\nJ = 1, h = 0 dimer: E_g = {:.12}", g.energy);
    for (k, a) in g.state.amplitudes().iter().enumerate() {
        println!("  |{k:02b}>  {:+.6} {:+.6}i", a.re, a.im);
    }
    Ok(())
}
