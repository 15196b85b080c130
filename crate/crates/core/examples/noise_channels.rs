//! The noise channels on small states: trace, purity and Kraus completeness.

use noisy_vqe::noise::{apply_bitflip, apply_depolarizing2, bitflip_kraus, depolarizing2_kraus, kraus_completeness_deviation};
use noisy_vqe::qcore::{apply_unitary, cnot_matrix, embed_single_qubit, rx};
use noisy_vqe::DensityMatrix;

fn main() -> noisy_vqe::Result<()> {
    let n = 3;
    // An entangled test state: RX on qubit 0, then CNOTs down the chain.
    let mut rho = DensityMatrix::zero_state(n);
    rho = apply_unitary(&rho, &embed_single_qubit(&rx(1.1), 0, n)?)?;
    rho = apply_unitary(&rho, &cnot_matrix(0, 1, n)?)?;
    rho = apply_unitary(&rho, &cnot_matrix(1, 2, n)?)?;
    println!("input: trace {:.15}, purity {:.6}", rho.trace().re, rho.purity());

    for p in [0.0, 0.05, 1.0 / 3.0] {
        let out = apply_bitflip(&rho, p)?;
        let dev = kraus_completeness_deviation(&bitflip_kraus(n, p)?);
        println!(
            "bit-flip p_x = {p:.4}: trace {:.15}, purity {:.6}, Kraus deviation {dev:.1e}",
            out.trace().re,
            out.purity()
        );
    }
    for p2 in [0.0, 0.1, 15.0 / 16.0] {
        let out = apply_depolarizing2(&rho, (0, 1), p2)?;
        let dev = kraus_completeness_deviation(&depolarizing2_kraus(n, (0, 1), p2)?);
        println!(
            "depolarizing p2 = {p2:.4} on (0,1): trace {:.15}, purity {:.6}, Kraus deviation {dev:.1e}",
            out.trace().re,
            out.purity()
        );
    }
    Ok(())
}
