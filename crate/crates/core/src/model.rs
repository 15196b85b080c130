//! XXX antiferromagnetic Heisenberg chain with a uniform field and its exact
//! ground state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{
    embed_single_qubit, hermitian_eigensystem, CMatrix, HermitianOperator, PureState, C64,
    PAULI_X, PAULI_Y, PAULI_Z,
};

/// Gap below which the lowest eigenvalues are treated as one ground space.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinChainSpec {
    pub num_spins: usize,
    pub coupling: f64,
    pub field: f64,
}

impl SpinChainSpec {
    pub fn new(num_spins: usize, coupling: f64, field: f64) -> Result<Self> {
        let spec = Self {
            num_spins,
            coupling,
            field,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// J = h = 1.
    pub fn unit(num_spins: usize) -> Self {
        Self {
            num_spins,
            coupling: 1.0,
            field: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_spins < 1 {
            return Err(Error::InvalidChain("need at least one spin".into()));
        }
        if !self.coupling.is_finite() || !self.field.is_finite() {
            return Err(Error::InvalidChain("J and h must be finite".into()));
        }
        if self.num_spins > 12 {
            return Err(Error::InvalidChain(format!(
                "{} spins exceeds the dense-storage limit of 12",
                self.num_spins
            )));
        }
        Ok(())
    }
}

/// H = J Σ_α Σ_j σ^α_j σ^α_{j+1} + h Σ_α Σ_j σ^α_j with open boundaries.
pub fn build_hamiltonian(spec: &SpinChainSpec) -> Result<HermitianOperator> {
    spec.validate()?;
    let n = spec.num_spins;
    let dim = 1 << n;
    let mut h = CMatrix::zeros(dim);
    for pauli in [PAULI_X, PAULI_Y, PAULI_Z] {
        let sites: Vec<CMatrix> = (0..n)
            .map(|j| embed_single_qubit(&pauli, j, n))
            .collect::<Result<_>>()?;
        for j in 0..n.saturating_sub(1) {
            let bond = sites[j].matmul(&sites[j + 1])?;
            h.add_scaled_in_place(&bond, spec.coupling);
        }
        for site in &sites {
            h.add_scaled_in_place(site, spec.field);
        }
    }
    HermitianOperator::new(h)
}

#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub energy: f64,
    pub state: PureState,
    pub degenerate: bool,
    /// Orthonormal basis of the ground space (one vector unless degenerate).
    pub ground_space: Vec<PureState>,
}

impl GroundTruth {
    pub fn degeneracy(&self) -> usize {
        self.ground_space.len()
    }

    /// Weight of ρ inside the ground space, Tr(P_g ρ).
    pub fn projector_weight(&self, rho: &CMatrix) -> f64 {
        self.ground_space
            .iter()
            .map(|g| {
                let v = g.amplitudes();
                let rv = rho.mul_vec(v);
                v.iter().zip(&rv).map(|(a, b)| a.conj() * b).sum::<C64>().re
            })
            .sum()
    }
}

pub fn exact_ground(h: &HermitianOperator) -> Result<GroundTruth> {
    let eig = hermitian_eigensystem(h)?;
    let e0 = eig.values[0];
    let ground_space: Vec<PureState> = eig
        .values
        .iter()
        .zip(&eig.vectors)
        .take_while(|(v, _)| *v - e0 <= DEGENERACY_TOL)
        .map(|(_, vec)| PureState::with_tolerance(vec.clone(), 1e-10))
        .collect::<Result<_>>()?;
    Ok(GroundTruth {
        energy: e0,
        state: ground_space[0].clone(),
        degenerate: ground_space.len() > 1,
        ground_space,
    })
}
