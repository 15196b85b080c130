//! Dense complex linear algebra on the 2^N-dimensional operator space.
//!
//! Qubit ordering: qubit 0 is the **most significant** bit of a basis-state
//! index. For N = 2 the basis is |q0 q1⟩ = |00⟩, |01⟩, |10⟩, |11⟩ at indices
//! 0..4, so `embed_single_qubit(Z, 1, 2)` acts on the rightmost ket label.
//! Site j of the chain (1-based in the usual physics notation) is qubit j − 1.
//!
//! Local gates and channels are applied by index-striding kernels; their
//! semantics are those of the full embedding, which the tests check.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// A 2×2 complex matrix, row-major.
pub type Mat2 = [[C64; 2]; 2];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub const PAULI_I: Mat2 = [[ONE, ZERO], [ZERO, ONE]];
pub const PAULI_X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
pub const PAULI_Y: Mat2 = [[ZERO, C64::new(0.0, -1.0)], [I, ZERO]];
pub const PAULI_Z: Mat2 = [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]];

/// Numerical tolerances used by validating constructors and checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub norm: f64,
    pub hermitian: f64,
    pub trace: f64,
    pub unitary: f64,
    pub imaginary: f64,
    pub eigen_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm: 1e-12,
            hermitian: 1e-12,
            trace: 1e-12,
            unitary: 1e-10,
            imaginary: 1e-10,
            eigen_residual: 1e-10,
        }
    }
}

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_mat2(m: &Mat2) -> Self {
        Self {
            dim: 2,
            data: vec![m[0][0], m[0][1], m[1][0], m[1][1]],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |r, c| v[r] * v[c].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[r * n..(r + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |r, c| {
            self.get(r / m, c / m) * other.get(r % m, c % m)
        })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-ONE))
    }

    pub fn add_scaled_in_place(&mut self, other: &Self, s: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Tr(self · other).
    pub fn trace_product(&self, other: &Self) -> C64 {
        let n = self.dim;
        let mut acc = ZERO;
        for r in 0..n {
            for c in 0..n {
                acc += self.data[r * n + c] * other.data[c * n + r];
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn unitary_deviation(&self) -> f64 {
        let prod = self
            .adjoint()
            .matmul(self)
            .expect("adjoint has matching dimension");
        prod.max_abs_diff(&Self::identity(self.dim))
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n)
            .map(|r| {
                self.data[r * n..(r + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other,
            });
        }
        Ok(())
    }
}

pub(crate) fn num_qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch {
            expected: dim.next_power_of_two().max(2),
            actual: dim,
        });
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Bit mask of `qubit` inside a basis index (qubit 0 is the MSB).
#[inline]
pub fn qubit_mask(qubit: usize, num_qubits: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::with_tolerance(amplitudes, Tolerances::default().norm)
    }

    pub fn with_tolerance(amplitudes: Vec<C64>, tol: f64) -> Result<Self> {
        let num_qubits = num_qubits_for_dim(amplitudes.len())?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol {
            return Err(Error::Numerical(format!("state norm {norm} differs from 1")));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[index] = ONE;
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            num_qubits: self.num_qubits,
            m: CMatrix::outer(&self.amplitudes),
        }
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// ⟨ψ|H|ψ⟩.
    pub fn expectation(&self, h: &HermitianOperator) -> f64 {
        let hv = h.matrix().mul_vec(&self.amplitudes);
        self.amplitudes
            .iter()
            .zip(&hv)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .re
    }
}

/// Density matrix on N qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    m: CMatrix,
}

impl DensityMatrix {
    /// |0…0⟩⟨0…0|.
    pub fn zero_state(num_qubits: usize) -> Self {
        let mut m = CMatrix::zeros(1 << num_qubits);
        m.set(0, 0, ONE);
        Self { num_qubits, m }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1 << num_qubits;
        Self {
            num_qubits,
            m: CMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
        }
    }

    /// Validates hermiticity and unit trace.
    pub fn from_matrix(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        let num_qubits = num_qubits_for_dim(m.dim())?;
        let dev = m.hermitian_deviation();
        if dev > tol.hermitian {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = m.trace();
        if (tr - ONE).norm() > tol.trace {
            return Err(Error::Numerical(format!("density matrix trace {tr} != 1")));
        }
        Ok(Self { num_qubits, m })
    }

    pub(crate) fn from_matrix_unchecked(num_qubits: usize, m: CMatrix) -> Self {
        Self { num_qubits, m }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut CMatrix {
        &mut self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn purity(&self) -> f64 {
        self.m.trace_product(&self.m).re
    }

    /// ρ → GρG† for a single-qubit gate on `qubit`.
    pub fn conjugate_1q(&mut self, g: &Mat2, qubit: usize) {
        let mask = qubit_mask(qubit, self.num_qubits);
        conj_1q_raw(self.m.data_mut(), 1 << self.num_qubits, mask, g);
    }

    /// ρ → RZ(θ) ρ RZ(θ)† with RZ(θ) = exp(−iθZ/2).
    pub fn conjugate_rz(&mut self, theta: f64, qubit: usize) {
        let mask = qubit_mask(qubit, self.num_qubits);
        conj_rz_raw(self.m.data_mut(), 1 << self.num_qubits, mask, theta);
    }

    /// ρ → CNOT ρ CNOT.
    pub fn conjugate_cnot(&mut self, control: usize, target: usize) {
        let cm = qubit_mask(control, self.num_qubits);
        let tm = qubit_mask(target, self.num_qubits);
        conj_cnot_raw(self.m.data_mut(), 1 << self.num_qubits, cm, tm);
    }

    /// X_j ρ X_j as a new matrix.
    pub fn flipped(&self, qubit: usize) -> CMatrix {
        let mask = qubit_mask(qubit, self.num_qubits);
        flip_raw(&self.m, mask)
    }

    /// Reduced density matrix on `keep` (in the given order).
    pub fn partial_trace_keep(&self, keep: &[usize]) -> Result<CMatrix> {
        let n = self.num_qubits;
        for &q in keep {
            if q >= n {
                return Err(Error::QubitOutOfRange {
                    site: q,
                    num_qubits: n,
                });
            }
        }
        let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let k = keep.len();
        let compose = |sub: usize, env: usize| -> usize {
            let mut idx = 0usize;
            for (i, &q) in keep.iter().enumerate() {
                if (sub >> (k - 1 - i)) & 1 == 1 {
                    idx |= qubit_mask(q, n);
                }
            }
            for (i, &q) in rest.iter().enumerate() {
                if (env >> (rest.len() - 1 - i)) & 1 == 1 {
                    idx |= qubit_mask(q, n);
                }
            }
            idx
        };
        let out = CMatrix::from_fn(1 << k, |r, c| {
            (0..1usize << rest.len())
                .map(|e| self.m.get(compose(r, e), compose(c, e)))
                .sum()
        });
        Ok(out)
    }

    pub fn smallest_eigenvalue(&self) -> Result<f64> {
        let op = HermitianOperator::new(self.m.clone())?;
        Ok(hermitian_eigensystem(&op)?.values[0])
    }
}

/// Hermitian operator on N qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    num_qubits: usize,
    m: CMatrix,
}

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, Tolerances::default().hermitian)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        let num_qubits = if m.dim() == 1 {
            0
        } else {
            num_qubits_for_dim(m.dim())?
        };
        let deviation = m.hermitian_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { num_qubits, m })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            num_qubits: self.num_qubits,
            m: self.m.scale(C64::new(s, 0.0)),
        }
    }
}

/// I ⊗ … ⊗ op ⊗ … ⊗ I with `op` on `site` (qubit 0 leftmost).
pub fn embed_single_qubit(op: &Mat2, site: usize, num_qubits: usize) -> Result<CMatrix> {
    if site >= num_qubits {
        return Err(Error::QubitOutOfRange { site, num_qubits });
    }
    let mut out = CMatrix::identity(1);
    for q in 0..num_qubits {
        let factor = if q == site { op } else { &PAULI_I };
        out = out.kron(&CMatrix::from_mat2(factor));
    }
    Ok(out)
}

/// UρU†, checking that U is unitary.
pub fn apply_unitary(rho: &DensityMatrix, u: &CMatrix) -> Result<DensityMatrix> {
    apply_unitary_with(rho, u, &Tolerances::default())
}

pub fn apply_unitary_with(
    rho: &DensityMatrix,
    u: &CMatrix,
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    if u.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: u.dim(),
        });
    }
    let deviation = u.unitary_deviation();
    if deviation > tol.unitary {
        return Err(Error::NotUnitary { deviation });
    }
    let m = u.matmul(&rho.m)?.matmul(&u.adjoint())?;
    Ok(DensityMatrix {
        num_qubits: rho.num_qubits,
        m,
    })
}

/// Tr(ρH), rejecting a non-negligible imaginary part.
pub fn expectation(rho: &DensityMatrix, h: &HermitianOperator) -> Result<f64> {
    expectation_with(rho, h, &Tolerances::default())
}

pub fn expectation_with(
    rho: &DensityMatrix,
    h: &HermitianOperator,
    tol: &Tolerances,
) -> Result<f64> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: h.dim(),
        });
    }
    let v = rho.m.trace_product(&h.m);
    if v.im.abs() > tol.imaginary {
        return Err(Error::ImaginaryExpectation { imag: v.im });
    }
    Ok(v.re)
}

/// Eigenvalues ascending with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    /// `vectors[k]` is the eigenvector of `values[k]`.
    pub vectors: Vec<Vec<C64>>,
}

pub fn hermitian_eigensystem(h: &HermitianOperator) -> Result<Eigensystem> {
    let n = h.dim();
    let dm = DMatrix::from_fn(n, n, |r, c| h.m.get(r, c));
    let eig = SymmetricEigen::new(dm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    Ok(Eigensystem { values, vectors })
}

// ---- index-striding kernels on row-major dim×dim buffers ----

#[inline]
pub(crate) fn conj_1q_raw(d: &mut [C64], dim: usize, mask: usize, g: &Mat2) {
    let (g00, g01, g10, g11) = (g[0][0], g[0][1], g[1][0], g[1][1]);
    let (h00, h01, h10, h11) = (g00.conj(), g01.conj(), g10.conj(), g11.conj());
    // Each 2x2 block on rows (r0, r1) and columns (c0, c1) maps to G·B·G†.
    for rb in (0..dim).step_by(2 * mask) {
        for r0 in rb..rb + mask {
            let r1 = r0 | mask;
            let (lo, hi) = d.split_at_mut(r1 * dim);
            let row0 = &mut lo[r0 * dim..(r0 + 1) * dim];
            let row1 = &mut hi[..dim];
            for cb in (0..dim).step_by(2 * mask) {
                for c0 in cb..cb + mask {
                    let c1 = c0 | mask;
                    let (a, b, c, e) = (row0[c0], row0[c1], row1[c0], row1[c1]);
                    let t00 = g00 * a + g01 * c;
                    let t01 = g00 * b + g01 * e;
                    let t10 = g10 * a + g11 * c;
                    let t11 = g10 * b + g11 * e;
                    row0[c0] = t00 * h00 + t01 * h01;
                    row0[c1] = t00 * h10 + t01 * h11;
                    row1[c0] = t10 * h00 + t11 * h01;
                    row1[c1] = t10 * h10 + t11 * h11;
                }
            }
        }
    }
}

/// RX(θ) conjugation: G·B·G† = c²B + s²XBX + ics(BX − XB) on each 2x2 block.
pub(crate) fn conj_rx_raw(d: &mut [C64], dim: usize, mask: usize, theta: f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    let (cc, ss, cs) = (c * c, s * s, c * s);
    let ics = |z: C64| C64::new(-cs * z.im, cs * z.re);
    for rb in (0..dim).step_by(2 * mask) {
        for r0 in rb..rb + mask {
            let r1 = r0 | mask;
            let (lo, hi) = d.split_at_mut(r1 * dim);
            let row0 = &mut lo[r0 * dim..(r0 + 1) * dim];
            let row1 = &mut hi[..dim];
            for cb in (0..dim).step_by(2 * mask) {
                for c0 in cb..cb + mask {
                    let c1 = c0 | mask;
                    let (a, b, l, e) = (row0[c0], row0[c1], row1[c0], row1[c1]);
                    row0[c0] = a * cc + e * ss + ics(b - l);
                    row0[c1] = b * cc + l * ss + ics(a - e);
                    row1[c0] = l * cc + b * ss + ics(e - a);
                    row1[c1] = e * cc + a * ss + ics(l - b);
                }
            }
        }
    }
}

#[inline]
pub(crate) fn conj_rz_raw(d: &mut [C64], dim: usize, mask: usize, theta: f64) {
    let down = C64::from_polar(1.0, -theta);
    let up = C64::from_polar(1.0, theta);
    for (r, row) in d.chunks_exact_mut(dim).enumerate() {
        // Only entries whose row and column bits differ pick up a phase.
        let (phase, offset) = if r & mask == 0 { (down, mask) } else { (up, 0) };
        for cb in (0..dim).step_by(2 * mask) {
            for x in &mut row[cb + offset..cb + offset + mask] {
                *x *= phase;
            }
        }
    }
}

#[inline]
pub(crate) fn conj_cnot_raw(d: &mut [C64], dim: usize, cmask: usize, tmask: usize) {
    let perm = |i: usize| if i & cmask != 0 { i ^ tmask } else { i };
    // Rows first, then columns; both permutations are involutions.
    for r in 0..dim {
        let pr = perm(r);
        if pr > r {
            for c in 0..dim {
                d.swap(r * dim + c, pr * dim + c);
            }
        }
    }
    for r in 0..dim {
        let row = &mut d[r * dim..(r + 1) * dim];
        for c in 0..dim {
            let pc = perm(c);
            if pc > c {
                row.swap(c, pc);
            }
        }
    }
}

pub(crate) fn flip_raw(m: &CMatrix, mask: usize) -> CMatrix {
    let dim = m.dim();
    let mut out = CMatrix::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            out.data[r * dim + c] = m.data[(r ^ mask) * dim + (c ^ mask)];
        }
    }
    out
}

/// RX(θ) = exp(−iθX/2).
pub fn rx(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), C64::new(0.0, -s)],
        [C64::new(0.0, -s), C64::new(c, 0.0)],
    ]
}

/// RZ(θ) = exp(−iθZ/2).
pub fn rz(theta: f64) -> Mat2 {
    [
        [C64::from_polar(1.0, -theta / 2.0), ZERO],
        [ZERO, C64::from_polar(1.0, theta / 2.0)],
    ]
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// Full 2^N matrix of CNOT(control, target).
pub fn cnot_matrix(control: usize, target: usize, num_qubits: usize) -> Result<CMatrix> {
    for q in [control, target] {
        if q >= num_qubits {
            return Err(Error::QubitOutOfRange {
                site: q,
                num_qubits,
            });
        }
    }
    if control == target {
        return Err(Error::InvalidPair(control, target));
    }
    let dim = 1 << num_qubits;
    let cm = qubit_mask(control, num_qubits);
    let tm = qubit_mask(target, num_qubits);
    Ok(CMatrix::from_fn(dim, |r, c| {
        let image = if c & cm != 0 { c ^ tm } else { c };
        if r == image {
            ONE
        } else {
            ZERO
        }
    }))
}
