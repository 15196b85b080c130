//! Hardware-efficient ansatz layouts and their noisy simulation.
//!
//! Layout of `build_layout(N, n_layers)`:
//!
//! 1. RX on every qubit (params 0..N), then RZ on every qubit (N..2N).
//! 2. Per layer, the CNOT brick: pairs (0,1), (2,3), … then (1,2), (3,4), …
//!    with control on the lower qubit. Each CNOT is followed by
//!    RX(control), RX(target), RZ(control), RZ(target) with four fresh
//!    parameters in that order.
//! 3. A noise marker closes each layer.
//!
//! That gives 2N + 4(N − 1)·n_layers parameters: 8 for the dimer and 74 for
//! N = 5 with four layers. Rotations are RX(θ) = exp(−iθX/2) and
//! RZ(θ) = exp(−iθZ/2).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{Mode, Program};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::qcore::{CMatrix, DensityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Slot {
    Cnot { control: usize, target: usize },
    Rx { qubit: usize, param: usize },
    Rz { qubit: usize, param: usize },
    NoiseMarker { layer: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitLayout {
    num_qubits: usize,
    num_layers: usize,
    param_count: usize,
    slots: Vec<Slot>,
}

pub fn param_count(num_qubits: usize, num_layers: usize) -> usize {
    2 * num_qubits + 4 * num_qubits.saturating_sub(1) * num_layers
}

/// CNOT pairs of one layer in brick order.
pub fn brick_pairs(num_qubits: usize) -> Vec<(usize, usize)> {
    let even = (0..num_qubits.saturating_sub(1)).step_by(2);
    let odd = (1..num_qubits.saturating_sub(1)).step_by(2);
    even.chain(odd).map(|q| (q, q + 1)).collect()
}

pub fn build_layout(num_qubits: usize, num_layers: usize) -> Result<CircuitLayout> {
    if num_qubits < 2 {
        return Err(Error::Config(format!(
            "ansatz needs at least 2 qubits, got {num_qubits}"
        )));
    }
    if num_layers < 1 {
        return Err(Error::Config("ansatz needs at least one layer".into()));
    }
    let mut slots = Vec::new();
    let mut next = 0;
    for qubit in 0..num_qubits {
        slots.push(Slot::Rx { qubit, param: next });
        next += 1;
    }
    for qubit in 0..num_qubits {
        slots.push(Slot::Rz { qubit, param: next });
        next += 1;
    }
    let pairs = brick_pairs(num_qubits);
    for layer in 0..num_layers {
        for &(control, target) in &pairs {
            slots.push(Slot::Cnot { control, target });
            slots.push(Slot::Rx { qubit: control, param: next });
            slots.push(Slot::Rx { qubit: target, param: next + 1 });
            slots.push(Slot::Rz { qubit: control, param: next + 2 });
            slots.push(Slot::Rz { qubit: target, param: next + 3 });
            next += 4;
        }
        slots.push(Slot::NoiseMarker { layer });
    }
    debug_assert_eq!(next, param_count(num_qubits, num_layers));
    Ok(CircuitLayout {
        num_qubits,
        num_layers,
        param_count: next,
        slots,
    })
}

impl CircuitLayout {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn cnot_count(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| matches!(s, Slot::Cnot { .. }))
            .count()
    }

    pub(crate) fn with_slots(&self, slots: Vec<Slot>) -> Self {
        Self {
            slots,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let layout: Self = serde_json::from_str(text)?;
        layout.validate()?;
        Ok(layout)
    }

    /// Parameter indices cover 0..param_count (each at least once) and qubit
    /// indices are in range.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.param_count];
        for slot in &self.slots {
            let qubits: &[usize] = match slot {
                Slot::Cnot { control, target } => {
                    if control == target {
                        return Err(Error::InvalidPair(*control, *target));
                    }
                    &[*control, *target]
                }
                Slot::Rx { qubit, param } | Slot::Rz { qubit, param } => {
                    if *param >= self.param_count {
                        return Err(Error::ParameterCount {
                            expected: self.param_count,
                            actual: param + 1,
                        });
                    }
                    seen[*param] = true;
                    std::slice::from_ref(qubit)
                }
                Slot::NoiseMarker { .. } => &[],
            };
            if let Some(&q) = qubits.iter().find(|&&q| q >= self.num_qubits) {
                return Err(Error::QubitOutOfRange {
                    site: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::Config(format!("parameter {k} is never used")));
        }
        Ok(())
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.param_count {
            return Err(Error::ParameterCount {
                expected: self.param_count,
                actual: theta.len(),
            });
        }
        Ok(())
    }
}

/// (t0, t0, t1, t1, −t0, −t0, −t1, −t1).
pub fn expand_two_param(t0: f64, t1: f64) -> [f64; 8] {
    [t0, t0, t1, t1, -t0, -t0, -t1, -t1]
}

/// Coefficients of `expand_two_param`: row k holds (∂θ_k/∂t0, ∂θ_k/∂t1).
const DIMER2_CONSTRAINT: [[f64; 2]; 8] = [
    [1.0, 0.0],
    [1.0, 0.0],
    [0.0, 1.0],
    [0.0, 1.0],
    [-1.0, 0.0],
    [-1.0, 0.0],
    [0.0, -1.0],
    [0.0, -1.0],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzVariant {
    General { num_qubits: usize, num_layers: usize },
    Dimer8,
    Dimer2,
}

impl AnsatzVariant {
    pub fn num_qubits(&self) -> usize {
        match *self {
            Self::General { num_qubits, .. } => num_qubits,
            Self::Dimer8 | Self::Dimer2 => 2,
        }
    }

    pub fn num_layers(&self) -> usize {
        match *self {
            Self::General { num_layers, .. } => num_layers,
            Self::Dimer8 | Self::Dimer2 => 1,
        }
    }

    pub fn layout(&self) -> Result<CircuitLayout> {
        build_layout(self.num_qubits(), self.num_layers())
    }

    /// Dimension of the optimized parameter vector.
    pub fn num_params(&self) -> usize {
        match self {
            Self::Dimer2 => 2,
            _ => param_count(self.num_qubits(), self.num_layers()),
        }
    }

    /// Maps variant parameters onto layout parameters.
    pub fn expand(&self, params: &[f64]) -> Vec<f64> {
        match self {
            Self::Dimer2 => expand_two_param(params[0], params[1]).to_vec(),
            _ => params.to_vec(),
        }
    }

    /// Chain rule through `expand`.
    pub fn pullback_gradient(&self, layout_grad: &[f64]) -> Vec<f64> {
        match self {
            Self::Dimer2 => (0..2)
                .map(|i| {
                    DIMER2_CONSTRAINT
                        .iter()
                        .zip(layout_grad)
                        .map(|(row, g)| row[i] * g)
                        .sum()
                })
                .collect(),
            _ => layout_grad.to_vec(),
        }
    }

    /// n_layers · N, the natural scale of the bit-flip rate.
    pub fn noise_scale(&self) -> f64 {
        (self.num_layers() * self.num_qubits()) as f64
    }
}

impl fmt::Display for AnsatzVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::General {
                num_qubits,
                num_layers,
            } => write!(f, "general({num_qubits},{num_layers})"),
            Self::Dimer8 => f.write_str("dimer8"),
            Self::Dimer2 => f.write_str("dimer2"),
        }
    }
}

impl FromStr for AnsatzVariant {
    type Err = Error;

    /// Accepts `dimer8`, `dimer2`, or `general(N,L)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "dimer8" => return Ok(Self::Dimer8),
            "dimer2" => return Ok(Self::Dimer2),
            _ => {}
        }
        let inner = s
            .strip_prefix("general(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Config(format!("unknown ansatz variant `{s}`")))?;
        let mut parts = inner.split(',').map(|p| p.trim().parse::<usize>());
        match (parts.next(), parts.next(), parts.next()) {
            (Some(Ok(num_qubits)), Some(Ok(num_layers)), None) => Ok(Self::General {
                num_qubits,
                num_layers,
            }),
            _ => Err(Error::Config(format!("malformed ansatz variant `{s}`"))),
        }
    }
}

/// Wraps every entry into [−π, π).
pub fn wrap_angles(theta: &[f64]) -> Vec<f64> {
    theta
        .iter()
        .map(|t| (t + PI).rem_euclid(2.0 * PI) - PI)
        .collect()
}

/// Noisy density matrix of the layout at `theta`, starting from |0…0⟩.
pub fn simulate(layout: &CircuitLayout, theta: &[f64], noise: &NoiseModel) -> Result<DensityMatrix> {
    layout.check_theta(theta)?;
    noise.validate(layout.num_qubits())?;
    let prog = Program::compile(layout, noise, Mode::Exact);
    let m = prog.run(theta).remove(0);
    Ok(DensityMatrix::from_matrix_unchecked(layout.num_qubits(), m))
}

/// Noiseless state right after one layer, plus where the rest of the
/// circuit starts.
#[derive(Debug, Clone)]
pub struct ErrorFreePrefix {
    pub layer: usize,
    pub state: DensityMatrix,
    suffix_start: usize,
}

impl ErrorFreePrefix {
    /// Slots after this layer's noise marker.
    pub fn suffix<'a>(&self, layout: &'a CircuitLayout) -> &'a [Slot] {
        &layout.slots()[self.suffix_start..]
    }

    /// Applies the noiseless remainder of the circuit to `rho`.
    pub fn apply_suffix(&self, layout: &CircuitLayout, rho: &CMatrix, theta: &[f64]) -> CMatrix {
        let prog = Program::compile_slots(
            layout,
            self.suffix(layout),
            &NoiseModel::noiseless(),
            Mode::Exact,
        );
        prog.run_from(rho.clone(), theta)
    }
}

pub fn simulate_error_free_prefixes(
    layout: &CircuitLayout,
    theta: &[f64],
) -> Result<Vec<ErrorFreePrefix>> {
    layout.check_theta(theta)?;
    let noiseless = NoiseModel::noiseless();
    let mut rho = DensityMatrix::zero_state(layout.num_qubits()).matrix().clone();
    let mut start = 0;
    let mut out = Vec::with_capacity(layout.num_layers());
    for (i, slot) in layout.slots().iter().enumerate() {
        if let Slot::NoiseMarker { layer } = *slot {
            let prog =
                Program::compile_slots(layout, &layout.slots()[start..i], &noiseless, Mode::Exact);
            rho = prog.run_from(rho, theta);
            start = i + 1;
            out.push(ErrorFreePrefix {
                layer,
                state: DensityMatrix::from_matrix_unchecked(layout.num_qubits(), rho.clone()),
                suffix_start: start,
            });
        }
    }
    Ok(out)
}
