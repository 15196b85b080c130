//! Noisy variational eigensolver simulations for small Heisenberg chains.
//!
//! Density-matrix simulation of a hardware-efficient ansatz under bit-flip
//! and per-CNOT noise, exact and first-order cost functions with analytic
//! gradients, multi-start L-BFGS, and the experiment drivers built on top.

pub mod ansatz;
pub mod cost;
mod engine;
pub mod error;
pub mod explab;
pub mod model;
pub mod noise;
pub mod optimize;
pub mod qcore;

pub use ansatz::{build_layout, AnsatzVariant, CircuitLayout, Slot};
pub use cost::{CostContext, CostKind, CostValue};
pub use error::{Error, Result};
pub use model::{build_hamiltonian, exact_ground, GroundTruth, SpinChainSpec};
pub use noise::{CnotNoise, FoldSetting, NoiseModel};
pub use optimize::{multi_start, OptimizerConfig, SolutionRecord, SolutionSet};
pub use qcore::{DensityMatrix, HermitianOperator, PureState};
