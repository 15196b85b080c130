//! Noise channels and the CNOT folding rewrite.
//!
//! The register bit-flip channel is the correlated single-flip form
//! ρ → (1 − N p) ρ + p Σ_j X_j ρ X_j: one Kraus branch per qubit plus the
//! identity branch, not independent per-qubit flips.

use serde::{Deserialize, Serialize};

use crate::ansatz::{CircuitLayout, Slot};
use crate::error::{Error, Result};
use crate::qcore::{
    conj_1q_raw, embed_single_qubit, flip_raw, qubit_mask, CMatrix, DensityMatrix, Mat2, C64,
    PAULI_I, PAULI_X, PAULI_Y, PAULI_Z,
};

/// Error model attached to every physical CNOT application.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CnotNoise {
    /// (1 − p) ρ + p/15 Σ_{P ≠ I⊗I} P ρ P on the CNOT pair.
    #[default]
    Depolarizing2,
    /// Independent single-qubit depolarizing of rate p on control and target.
    LocalDepolarizing,
    /// Register bit-flip of rate p restricted to the CNOT pair.
    BitFlip,
}

impl std::str::FromStr for CnotNoise {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "depolarizing2" => Ok(Self::Depolarizing2),
            "local-depolarizing" => Ok(Self::LocalDepolarizing),
            "bitflip" | "bit-flip" => Ok(Self::BitFlip),
            other => Err(Error::Config(format!("unknown CNOT noise model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Bit-flip rate applied at every layer marker.
    pub p_x: f64,
    /// Error rate applied after every physical CNOT.
    pub cnot_depolarizing: f64,
    #[serde(default)]
    pub cnot_noise: CnotNoise,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn bit_flip(p_x: f64) -> Self {
        Self {
            p_x,
            ..Self::default()
        }
    }

    pub fn per_cnot(kind: CnotNoise, rate: f64) -> Self {
        Self {
            p_x: 0.0,
            cnot_depolarizing: rate,
            cnot_noise: kind,
        }
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        check_bitflip_rate(self.p_x, num_qubits)?;
        check_rate(self.cnot_depolarizing)?;
        if self.cnot_noise == CnotNoise::BitFlip && self.cnot_depolarizing > 0.5 {
            return Err(Error::BitFlipRate {
                p_x: self.cnot_depolarizing,
                num_qubits: 2,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FoldSetting {
    pub m: usize,
}

fn check_bitflip_rate(p_x: f64, num_qubits: usize) -> Result<()> {
    // Exact comparison against 1/N would reject p = 1/N itself after rounding.
    if !(p_x >= 0.0 && p_x * num_qubits as f64 <= 1.0 + 1e-15) {
        return Err(Error::BitFlipRate { p_x, num_qubits });
    }
    Ok(())
}

fn check_rate(p2: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p2) {
        return Err(Error::DepolarizingRate { p2 });
    }
    Ok(())
}

/// ρ' = (1 − N p_x) ρ + p_x Σ_j X_j ρ X_j.
pub fn apply_bitflip(rho: &DensityMatrix, p_x: f64) -> Result<DensityMatrix> {
    check_bitflip_rate(p_x, rho.num_qubits())?;
    let mut out = rho.clone();
    bitflip_in_place(out.matrix_mut(), rho.num_qubits(), p_x);
    Ok(out)
}

/// Same map on a raw operator. The channel is self-adjoint, so this also
/// propagates observables backwards.
pub(crate) fn bitflip_in_place(m: &mut CMatrix, num_qubits: usize, p_x: f64) {
    if p_x == 0.0 {
        return;
    }
    let src = m.clone();
    flip_sum_into(m, &src, num_qubits, 1.0 - num_qubits as f64 * p_x, p_x);
}

/// Σ_j X_j m X_j − N m (first-order coefficient of the bit-flip channel).
pub(crate) fn bitflip_generator(m: &CMatrix, num_qubits: usize) -> CMatrix {
    let mut out = m.clone();
    flip_sum_into(&mut out, m, num_qubits, -(num_qubits as f64), 1.0);
    out
}

/// out = a·src + b·Σ_j X_j src X_j.
fn flip_sum_into(out: &mut CMatrix, src: &CMatrix, num_qubits: usize, a: f64, b: f64) {
    let dim = src.dim();
    let masks: Vec<usize> = (0..num_qubits).map(|j| qubit_mask(j, num_qubits)).collect();
    let sd = src.data();
    for (r, row) in out.data_mut().chunks_exact_mut(dim).enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &mk in &masks {
                acc += sd[(r ^ mk) * dim + (c ^ mk)];
            }
            *x = sd[r * dim + c] * a + acc * b;
        }
    }
}

fn check_pair(pair: (usize, usize), num_qubits: usize) -> Result<()> {
    let (a, b) = pair;
    if a == b {
        return Err(Error::InvalidPair(a, b));
    }
    for q in [a, b] {
        if q >= num_qubits {
            return Err(Error::QubitOutOfRange {
                site: q,
                num_qubits,
            });
        }
    }
    Ok(())
}

const PAULIS: [Mat2; 4] = [PAULI_I, PAULI_X, PAULI_Y, PAULI_Z];

/// ρ' = (1 − p2) ρ + (p2/15) Σ_{P ≠ I⊗I} P ρ P on `pair`.
pub fn apply_depolarizing2(
    rho: &DensityMatrix,
    pair: (usize, usize),
    p2: f64,
) -> Result<DensityMatrix> {
    check_pair(pair, rho.num_qubits())?;
    check_rate(p2)?;
    let mut out = rho.clone();
    depolarizing2_in_place(out.matrix_mut(), rho.num_qubits(), pair, p2);
    Ok(out)
}

pub(crate) fn depolarizing2_in_place(
    m: &mut CMatrix,
    num_qubits: usize,
    pair: (usize, usize),
    p2: f64,
) {
    if p2 == 0.0 {
        return;
    }
    let dim = m.dim();
    let (ma, mb) = (qubit_mask(pair.0, num_qubits), qubit_mask(pair.1, num_qubits));
    let mut acc = m.scale(C64::new(1.0 - p2, 0.0));
    for (ia, pa) in PAULIS.iter().enumerate() {
        for (ib, pb) in PAULIS.iter().enumerate() {
            if ia == 0 && ib == 0 {
                continue;
            }
            let mut term = m.clone();
            if ia != 0 {
                conj_1q_raw(term.data_mut(), dim, ma, pa);
            }
            if ib != 0 {
                conj_1q_raw(term.data_mut(), dim, mb, pb);
            }
            acc.add_scaled_in_place(&term, p2 / 15.0);
        }
    }
    *m = acc;
}

/// ρ' = (1 − p) ρ + (p/3)(XρX + YρY + ZρZ) on one qubit.
pub(crate) fn depolarizing1_in_place(m: &mut CMatrix, num_qubits: usize, qubit: usize, p: f64) {
    if p == 0.0 {
        return;
    }
    let dim = m.dim();
    let mask = qubit_mask(qubit, num_qubits);
    let mut acc = m.scale(C64::new(1.0 - p, 0.0));
    for pauli in &PAULIS[1..] {
        let mut term = m.clone();
        conj_1q_raw(term.data_mut(), dim, mask, pauli);
        acc.add_scaled_in_place(&term, p / 3.0);
    }
    *m = acc;
}

pub(crate) fn pair_bitflip_in_place(
    m: &mut CMatrix,
    num_qubits: usize,
    pair: (usize, usize),
    p: f64,
) {
    if p == 0.0 {
        return;
    }
    let fa = flip_raw(m, qubit_mask(pair.0, num_qubits));
    let fb = flip_raw(m, qubit_mask(pair.1, num_qubits));
    for x in m.data_mut() {
        *x *= 1.0 - 2.0 * p;
    }
    m.add_scaled_in_place(&fa, p);
    m.add_scaled_in_place(&fb, p);
}

/// Applies the configured per-CNOT channel. All variants are self-adjoint.
pub(crate) fn cnot_channel_in_place(
    m: &mut CMatrix,
    num_qubits: usize,
    pair: (usize, usize),
    kind: CnotNoise,
    rate: f64,
) {
    match kind {
        CnotNoise::Depolarizing2 => depolarizing2_in_place(m, num_qubits, pair, rate),
        CnotNoise::LocalDepolarizing => {
            depolarizing1_in_place(m, num_qubits, pair.0, rate);
            depolarizing1_in_place(m, num_qubits, pair.1, rate);
        }
        CnotNoise::BitFlip => pair_bitflip_in_place(m, num_qubits, pair, rate),
    }
}

pub fn apply_cnot_noise(
    rho: &DensityMatrix,
    pair: (usize, usize),
    kind: CnotNoise,
    rate: f64,
) -> Result<DensityMatrix> {
    check_pair(pair, rho.num_qubits())?;
    NoiseModel::per_cnot(kind, rate).validate(2)?;
    let mut out = rho.clone();
    cnot_channel_in_place(out.matrix_mut(), rho.num_qubits(), pair, kind, rate);
    Ok(out)
}

/// Kraus operators of the register bit-flip channel.
pub fn bitflip_kraus(num_qubits: usize, p_x: f64) -> Result<Vec<CMatrix>> {
    check_bitflip_rate(p_x, num_qubits)?;
    let dim = 1 << num_qubits;
    let mut ks = vec![CMatrix::identity(dim).scale(C64::new(
        (1.0 - num_qubits as f64 * p_x).max(0.0).sqrt(),
        0.0,
    ))];
    for j in 0..num_qubits {
        ks.push(embed_single_qubit(&PAULI_X, j, num_qubits)?.scale(C64::new(p_x.sqrt(), 0.0)));
    }
    Ok(ks)
}

/// Kraus operators of the two-qubit depolarizing channel on `pair`.
pub fn depolarizing2_kraus(
    num_qubits: usize,
    pair: (usize, usize),
    p2: f64,
) -> Result<Vec<CMatrix>> {
    check_pair(pair, num_qubits)?;
    check_rate(p2)?;
    let mut ks = Vec::with_capacity(16);
    for (ia, pa) in PAULIS.iter().enumerate() {
        for (ib, pb) in PAULIS.iter().enumerate() {
            let weight = if ia == 0 && ib == 0 { 1.0 - p2 } else { p2 / 15.0 };
            let op = embed_single_qubit(pa, pair.0, num_qubits)?
                .matmul(&embed_single_qubit(pb, pair.1, num_qubits)?)?;
            ks.push(op.scale(C64::new(weight.sqrt(), 0.0)));
        }
    }
    Ok(ks)
}

/// max |Σ K†K − I|.
pub fn kraus_completeness_deviation(kraus: &[CMatrix]) -> f64 {
    let dim = kraus[0].dim();
    let mut sum = CMatrix::zeros(dim);
    for k in kraus {
        let kk = k.adjoint().matmul(k).expect("square Kraus operators");
        sum.add_scaled_in_place(&kk, 1.0);
    }
    sum.max_abs_diff(&CMatrix::identity(dim))
}

/// Every CNOT becomes CNOT (CNOT CNOT)^m; other slots are untouched.
pub fn fold_layout(layout: &CircuitLayout, fold: FoldSetting) -> CircuitLayout {
    let mut slots = Vec::with_capacity(layout.slots().len());
    for slot in layout.slots() {
        match slot {
            Slot::Cnot { .. } => slots.extend(std::iter::repeat_n(*slot, 2 * fold.m + 1)),
            other => slots.push(*other),
        }
    }
    layout.with_slots(slots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{apply_unitary, Tolerances, ONE};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn random_density(n: usize, seed: u64) -> DensityMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dim = 1 << n;
        let a = CMatrix::from_fn(dim, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let m = a.matmul(&a.adjoint()).unwrap();
        let tr = m.trace().re;
        DensityMatrix::from_matrix(m.scale(C64::new(1.0 / tr, 0.0)), &Tolerances::default())
            .unwrap()
    }

    fn kraus_apply(rho: &DensityMatrix, ks: &[CMatrix]) -> CMatrix {
        let mut out = CMatrix::zeros(rho.dim());
        for k in ks {
            let term = k.matmul(rho.matrix()).unwrap().matmul(&k.adjoint()).unwrap();
            out.add_scaled_in_place(&term, 1.0);
        }
        out
    }

    #[test]
    fn bitflip_zero_rate_is_identity() {
        let rho = random_density(3, 1);
        assert_eq!(apply_bitflip(&rho, 0.0).unwrap(), rho);
    }

    #[test]
    fn maximally_mixed_is_fixed_point() {
        let rho = DensityMatrix::maximally_mixed(3);
        let out = apply_bitflip(&rho, 0.2).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-16);
    }

    #[test]
    fn single_qubit_flip_by_hand() {
        let out = apply_bitflip(&DensityMatrix::zero_state(1), 0.1).unwrap();
        assert_abs_diff_eq!(out.matrix().get(0, 0).re, 0.9, epsilon = 1e-16);
        assert_abs_diff_eq!(out.matrix().get(1, 1).re, 0.1, epsilon = 1e-16);
        assert_eq!(out.matrix().get(0, 1), C64::new(0.0, 0.0));
    }

    #[test]
    fn bitflip_rate_domain() {
        let rho = DensityMatrix::zero_state(2);
        assert!(apply_bitflip(&rho, 0.5).is_ok());
        assert!(matches!(
            apply_bitflip(&rho, 0.51),
            Err(Error::BitFlipRate { .. })
        ));
        assert!(apply_bitflip(&rho, -0.01).is_err());
    }

    #[test]
    fn bitflip_matches_kraus_form() {
        let rho = random_density(3, 5);
        let ks = bitflip_kraus(3, 0.07).unwrap();
        let direct = apply_bitflip(&rho, 0.07).unwrap();
        assert!(direct.matrix().max_abs_diff(&kraus_apply(&rho, &ks)) < 1e-15);
        assert!(kraus_completeness_deviation(&ks) < 1e-12);
        assert!((direct.trace() - ONE).norm() < 1e-14);
    }

    #[test]
    fn bitflip_affine_in_rate() {
        let rho = random_density(2, 9);
        let a = apply_bitflip(&rho, 0.1).unwrap();
        let b = apply_bitflip(&rho, 0.3).unwrap();
        let mid = apply_bitflip(&rho, 0.2).unwrap();
        let avg = a.matrix().add(b.matrix()).unwrap().scale(C64::new(0.5, 0.0));
        assert!(mid.matrix().max_abs_diff(&avg) < 1e-15);
    }

    #[test]
    fn depolarizing_zero_rate_is_identity() {
        let rho = random_density(3, 2);
        assert_eq!(apply_depolarizing2(&rho, (0, 2), 0.0).unwrap(), rho);
    }

    #[test]
    fn full_twirl_scrambles_pair() {
        let rho = random_density(3, 3);
        let out = apply_depolarizing2(&rho, (2, 0), 15.0 / 16.0).unwrap();
        let pair = out.partial_trace_keep(&[2, 0]).unwrap();
        assert_abs_diff_eq!(pair.trace_product(&pair).re, 0.25, epsilon = 1e-10);
        let rest_before = rho.partial_trace_keep(&[1]).unwrap();
        let rest_after = out.partial_trace_keep(&[1]).unwrap();
        assert!(rest_before.max_abs_diff(&rest_after) < 1e-14);
    }

    #[test]
    fn unit_rate_overshoots_twirl() {
        // At p2 = 1 the pair state is (4I − ρ_pair)/15.
        let rho = random_density(3, 3);
        let before = rho.partial_trace_keep(&[0, 1]).unwrap();
        let out = apply_depolarizing2(&rho, (0, 1), 1.0).unwrap();
        let pair = out.partial_trace_keep(&[0, 1]).unwrap();
        let expected = (56.0 + before.trace_product(&before).re) / 225.0;
        assert_abs_diff_eq!(pair.trace_product(&pair).re, expected, epsilon = 1e-12);
    }

    #[test]
    fn depolarizing_matches_kraus_form() {
        let rho = random_density(3, 4);
        let ks = depolarizing2_kraus(3, (1, 2), 0.3).unwrap();
        let direct = apply_depolarizing2(&rho, (1, 2), 0.3).unwrap();
        assert!(direct.matrix().max_abs_diff(&kraus_apply(&rho, &ks)) < 1e-14);
        assert!(kraus_completeness_deviation(&ks) < 1e-12);
        assert!((direct.trace() - ONE).norm() < 1e-14);
    }

    #[test]
    fn depolarizing_rejects_bad_input() {
        let rho = DensityMatrix::zero_state(2);
        assert!(matches!(
            apply_depolarizing2(&rho, (1, 1), 0.1),
            Err(Error::InvalidPair(1, 1))
        ));
        assert!(matches!(
            apply_depolarizing2(&rho, (0, 2), 0.1),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(matches!(
            apply_depolarizing2(&rho, (0, 1), 1.5),
            Err(Error::DepolarizingRate { .. })
        ));
    }

    #[test]
    fn two_qubit_depolarizing_commutes_with_pair_unitaries() {
        // On a two-qubit register this channel is unitarily invariant.
        let rho = random_density(2, 8);
        let u = embed_single_qubit(&crate::qcore::rx(0.4), 0, 2)
            .unwrap()
            .matmul(&crate::qcore::cnot_matrix(0, 1, 2).unwrap())
            .unwrap();
        let a = apply_depolarizing2(&apply_unitary(&rho, &u).unwrap(), (0, 1), 0.2).unwrap();
        let b = apply_unitary(&apply_depolarizing2(&rho, (0, 1), 0.2).unwrap(), &u).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-14);
    }

    #[test]
    fn cnot_noise_variants_preserve_trace() {
        let rho = random_density(3, 12);
        for kind in [
            CnotNoise::Depolarizing2,
            CnotNoise::LocalDepolarizing,
            CnotNoise::BitFlip,
        ] {
            let out = apply_cnot_noise(&rho, (0, 1), kind, 0.05).unwrap();
            assert!((out.trace() - ONE).norm() < 1e-14);
            assert!(out.matrix().hermitian_deviation() < 1e-14);
            assert!(out.smallest_eigenvalue().unwrap() > -1e-10);
        }
    }

    #[test]
    fn generator_is_derivative_of_channel() {
        let rho = random_density(3, 6);
        let h = 1e-3;
        let a = apply_bitflip(&rho, h).unwrap();
        let fd = a.matrix().sub(rho.matrix()).unwrap().scale(C64::new(1.0 / h, 0.0));
        let gen = bitflip_generator(rho.matrix(), 3);
        assert!(fd.max_abs_diff(&gen) < 1e-12);
    }
}
