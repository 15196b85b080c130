//! Compiled gate/channel programs and their evaluation.
//!
//! A program runs either on a single density matrix (exact noisy state) or on
//! a pair (ρ₀, ρ₁) truncated at first order in the bit-flip rate, where each
//! marker adds Σ_j X_j ρ₀ X_j − N ρ₀ to ρ₁. Every map in a program is linear
//! and the channels are self-adjoint, so observables propagate backwards
//! through the adjoint of each op.
//!
//! Gradients: for a rotation exp(−iθG/2) with Pauli G, the parameter-shift
//! difference [E(θ + π/2) − E(θ − π/2)]/2 equals (−i/2) Tr(O [G, ρ']) where
//! ρ' is the state just after the rotation and O the observable propagated
//! back to that point. Both are available from one forward pass with cached
//! states and one backward pass, so no per-parameter re-simulation is needed.

use crate::ansatz::{CircuitLayout, Slot};
use crate::noise::{bitflip_generator, bitflip_in_place, cnot_channel_in_place, CnotNoise, NoiseModel};
use crate::qcore::{conj_cnot_raw, conj_rx_raw, conj_rz_raw, qubit_mask, CMatrix, ONE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Op {
    Rx { qubit: usize, param: usize },
    Rz { qubit: usize, param: usize },
    Cnot { control: usize, target: usize },
    CnotNoise { control: usize, target: usize },
    Marker,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Mode {
    Exact,
    FirstOrder,
}

#[derive(Debug, Clone)]
pub(crate) struct Program {
    ops: Vec<Op>,
    num_qubits: usize,
    param_count: usize,
    p_x: f64,
    cnot_rate: f64,
    cnot_noise: CnotNoise,
    mode: Mode,
}

impl Program {
    pub(crate) fn compile(layout: &CircuitLayout, noise: &NoiseModel, mode: Mode) -> Self {
        Self::compile_slots(layout, layout.slots(), noise, mode)
    }

    pub(crate) fn compile_slots(
        layout: &CircuitLayout,
        slots: &[Slot],
        noise: &NoiseModel,
        mode: Mode,
    ) -> Self {
        let mut ops = Vec::with_capacity(slots.len() * 2);
        for slot in slots {
            match *slot {
                Slot::Rx { qubit, param } => ops.push(Op::Rx { qubit, param }),
                Slot::Rz { qubit, param } => ops.push(Op::Rz { qubit, param }),
                Slot::Cnot { control, target } => {
                    ops.push(Op::Cnot { control, target });
                    if noise.cnot_depolarizing > 0.0 {
                        ops.push(Op::CnotNoise { control, target });
                    }
                }
                Slot::NoiseMarker { .. } => {
                    let active = match mode {
                        Mode::Exact => noise.p_x > 0.0,
                        Mode::FirstOrder => true,
                    };
                    if active {
                        ops.push(Op::Marker);
                    }
                }
            }
        }
        Self {
            ops,
            num_qubits: layout.num_qubits(),
            param_count: layout.param_count(),
            p_x: noise.p_x,
            cnot_rate: noise.cnot_depolarizing,
            cnot_noise: noise.cnot_noise,
            mode,
        }
    }

    fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    fn initial(&self) -> Vec<CMatrix> {
        let mut rho = CMatrix::zeros(self.dim());
        rho.set(0, 0, ONE);
        match self.mode {
            Mode::Exact => vec![rho],
            Mode::FirstOrder => vec![rho, CMatrix::zeros(self.dim())],
        }
    }

    /// Weights of Tr(H ρ_c) in the energy.
    fn weights(&self) -> Vec<f64> {
        match self.mode {
            Mode::Exact => vec![1.0],
            Mode::FirstOrder => vec![1.0, self.p_x],
        }
    }

    fn apply_rotation(&self, m: &mut CMatrix, op: &Op, angle: f64) {
        let dim = self.dim();
        match *op {
            Op::Rx { qubit, .. } => {
                conj_rx_raw(m.data_mut(), dim, qubit_mask(qubit, self.num_qubits), angle)
            }
            Op::Rz { qubit, .. } => {
                conj_rz_raw(m.data_mut(), dim, qubit_mask(qubit, self.num_qubits), angle)
            }
            _ => unreachable!("not a rotation"),
        }
    }

    fn apply_fixed(&self, comps: &mut [CMatrix], op: &Op) {
        let n = self.num_qubits;
        let dim = self.dim();
        match *op {
            Op::Cnot { control, target } => {
                for m in comps.iter_mut() {
                    conj_cnot_raw(m.data_mut(), dim, qubit_mask(control, n), qubit_mask(target, n));
                }
            }
            Op::CnotNoise { control, target } => {
                for m in comps.iter_mut() {
                    cnot_channel_in_place(m, n, (control, target), self.cnot_noise, self.cnot_rate);
                }
            }
            Op::Marker => match self.mode {
                Mode::Exact => bitflip_in_place(&mut comps[0], n, self.p_x),
                Mode::FirstOrder => {
                    let gen = bitflip_generator(&comps[0], n);
                    comps[1].add_scaled_in_place(&gen, 1.0);
                }
            },
            Op::Rx { .. } | Op::Rz { .. } => unreachable!("rotations carry an angle"),
        }
    }

    /// Adjoint of a fixed op acting on observables.
    fn apply_fixed_adjoint(&self, obs: &mut [CMatrix], op: &Op) {
        match *op {
            Op::Marker if self.mode == Mode::FirstOrder => {
                let gen = bitflip_generator(&obs[1], self.num_qubits);
                obs[0].add_scaled_in_place(&gen, 1.0);
            }
            // CNOT conjugation and the channels are self-adjoint.
            _ => self.apply_fixed(obs, op),
        }
    }

    fn angle(op: &Op, theta: &[f64]) -> f64 {
        match *op {
            Op::Rx { param, .. } | Op::Rz { param, .. } => theta[param],
            _ => 0.0,
        }
    }

    fn is_rotation(op: &Op) -> bool {
        matches!(op, Op::Rx { .. } | Op::Rz { .. })
    }

    fn param_of(op: &Op) -> usize {
        match *op {
            Op::Rx { param, .. } | Op::Rz { param, .. } => param,
            _ => unreachable!("not a rotation"),
        }
    }

    /// Re[(−i/2) Tr(O [G, ρ])] for the rotation generator G of `op`.
    fn rotation_derivative(&self, o: &CMatrix, rho: &CMatrix, op: &Op) -> f64 {
        let dim = self.dim();
        let (od, rd) = (o.data(), rho.data());
        // Tr(O M) = Σ conj(O_rc) M_rc for Hermitian O; (−i/2)·z has real part Im(z)/2.
        let mut acc = 0.0;
        match *op {
            Op::Rx { qubit, .. } => {
                let mask = qubit_mask(qubit, self.num_qubits);
                for r in 0..dim {
                    let (row, flipped) = (&rd[r * dim..(r + 1) * dim], &rd[(r ^ mask) * dim..((r ^ mask) + 1) * dim]);
                    let orow = &od[r * dim..(r + 1) * dim];
                    for c in 0..dim {
                        let m = flipped[c] - row[c ^ mask];
                        acc += (orow[c].conj() * m).im;
                    }
                }
            }
            Op::Rz { qubit, .. } => {
                let mask = qubit_mask(qubit, self.num_qubits);
                for r in 0..dim {
                    // z(r) − z(c) is +2 for (0, 1) bits and −2 for (1, 0).
                    let (f, offset) = if r & mask == 0 { (2.0, mask) } else { (-2.0, 0) };
                    let (orow, rrow) = (&od[r * dim..(r + 1) * dim], &rd[r * dim..(r + 1) * dim]);
                    let mut part = 0.0;
                    for cb in (0..dim).step_by(2 * mask) {
                        for c in cb + offset..cb + offset + mask {
                            part += (orow[c].conj() * rrow[c]).im;
                        }
                    }
                    acc += f * part;
                }
            }
            _ => unreachable!("not a rotation"),
        }
        0.5 * acc
    }

    /// Final state components.
    pub(crate) fn run(&self, theta: &[f64]) -> Vec<CMatrix> {
        let mut comps = self.initial();
        self.run_ops_on(&mut comps, &self.ops, theta);
        comps
    }

    fn run_ops_on(&self, comps: &mut [CMatrix], ops: &[Op], theta: &[f64]) {
        for op in ops {
            if Self::is_rotation(op) {
                let a = Self::angle(op, theta);
                for m in comps.iter_mut() {
                    self.apply_rotation(m, op, a);
                }
            } else {
                self.apply_fixed(comps, op);
            }
        }
    }

    /// Runs this program on a given initial state (single component).
    pub(crate) fn run_from(&self, mut rho: CMatrix, theta: &[f64]) -> CMatrix {
        debug_assert_eq!(self.mode, Mode::Exact);
        self.run_ops_on(std::slice::from_mut(&mut rho), &self.ops, theta);
        rho
    }

    pub(crate) fn energy(&self, theta: &[f64], h: &CMatrix) -> f64 {
        let comps = self.run(theta);
        comps
            .iter()
            .zip(self.weights())
            .map(|(m, w)| w * hermitian_inner(h, m))
            .sum()
    }

    /// Energy and its shift-rule gradient with respect to layout parameters.
    pub(crate) fn energy_and_gradient(&self, theta: &[f64], h: &CMatrix) -> (f64, Vec<f64>) {
        let mut comps = self.initial();
        let mut snapshots: Vec<Vec<CMatrix>> = Vec::new();
        for op in &self.ops {
            if Self::is_rotation(op) {
                let a = Self::angle(op, theta);
                for m in comps.iter_mut() {
                    self.apply_rotation(m, op, a);
                }
                snapshots.push(comps.clone());
            } else {
                self.apply_fixed(&mut comps, op);
            }
        }
        let weights = self.weights();
        let energy = comps
            .iter()
            .zip(&weights)
            .map(|(m, w)| w * hermitian_inner(h, m))
            .sum();

        let mut obs: Vec<CMatrix> = weights.iter().map(|w| h.scale((*w).into())).collect();
        let mut grad = vec![0.0; self.param_count];
        for op in self.ops.iter().rev() {
            if Self::is_rotation(op) {
                let after = snapshots.pop().expect("one snapshot per rotation");
                let a = Self::angle(op, theta);
                let d: f64 = after
                    .iter()
                    .zip(&obs)
                    .map(|(rho, o)| self.rotation_derivative(o, rho, op))
                    .sum();
                grad[Self::param_of(op)] += d;
                for o in obs.iter_mut() {
                    self.apply_rotation(o, op, -a);
                }
            } else {
                self.apply_fixed_adjoint(&mut obs, op);
            }
        }
        (energy, grad)
    }
}

/// Re Tr(A·B) for Hermitian A, B: Σ Re(a)Re(b) + Im(a)Im(b) elementwise.
#[inline]
pub(crate) fn hermitian_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}
