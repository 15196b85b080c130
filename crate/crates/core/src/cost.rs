//! Noisy VQE cost E(θ) = Tr(ρ(θ)H), its first-order expansion in the
//! bit-flip rate, shift-rule gradients and the ground-state overlap.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::ansatz::{simulate, simulate_error_free_prefixes, AnsatzVariant, CircuitLayout};
use crate::engine::{Mode, Program};
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, exact_ground, GroundTruth, SpinChainSpec};
use crate::noise::NoiseModel;
use crate::optimize::Objective;
use crate::qcore::{expectation_with, hermitian_eigensystem, HermitianOperator, Tolerances};

/// Everything needed to evaluate the cost of one ansatz variant.
///
/// Parameter vectors passed to the functions of this module live in the
/// variant's own space: two entries for DIMER2, `layout.param_count()`
/// otherwise.
#[derive(Debug, Clone)]
pub struct CostContext {
    variant: AnsatzVariant,
    layout: CircuitLayout,
    hamiltonian: HermitianOperator,
    noise: NoiseModel,
    ground_truth: Option<GroundTruth>,
    lowest_eigenvalue: f64,
    tolerances: Tolerances,
    exact: Program,
    first_order: Program,
}

impl CostContext {
    /// Builds the Hamiltonian of `chain` and its ground truth.
    pub fn new(variant: AnsatzVariant, chain: &SpinChainSpec, noise: NoiseModel) -> Result<Self> {
        if chain.num_spins != variant.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: variant.num_qubits(),
                actual: chain.num_spins,
            });
        }
        let hamiltonian = build_hamiltonian(chain)?;
        let ground = exact_ground(&hamiltonian)?;
        Self::from_parts(variant, hamiltonian, noise, Some(ground))
    }

    pub fn from_parts(
        variant: AnsatzVariant,
        hamiltonian: HermitianOperator,
        noise: NoiseModel,
        ground_truth: Option<GroundTruth>,
    ) -> Result<Self> {
        let layout = variant.layout()?;
        if hamiltonian.dim() != 1 << layout.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: 1 << layout.num_qubits(),
                actual: hamiltonian.dim(),
            });
        }
        noise.validate(layout.num_qubits())?;
        let lowest_eigenvalue = match &ground_truth {
            Some(g) => g.energy,
            None => hermitian_eigensystem(&hamiltonian)?.values[0],
        };
        let exact = Program::compile(&layout, &noise, Mode::Exact);
        let first_order = Program::compile(&layout, &first_order_noise(&noise), Mode::FirstOrder);
        Ok(Self {
            variant,
            layout,
            hamiltonian,
            noise,
            ground_truth,
            lowest_eigenvalue,
            tolerances: Tolerances::default(),
            exact,
            first_order,
        })
    }

    /// Same variant and Hamiltonian under a different noise model.
    pub fn with_noise(&self, noise: NoiseModel) -> Result<Self> {
        noise.validate(self.layout.num_qubits())?;
        Ok(Self {
            noise,
            exact: Program::compile(&self.layout, &noise, Mode::Exact),
            first_order: Program::compile(&self.layout, &first_order_noise(&noise), Mode::FirstOrder),
            ..self.clone()
        })
    }

    /// Replaces the layout (e.g. by a folded one) keeping the parameter map.
    pub fn with_layout(&self, layout: CircuitLayout) -> Result<Self> {
        layout.validate()?;
        if layout.param_count() != self.layout.param_count()
            || layout.num_qubits() != self.layout.num_qubits()
        {
            return Err(Error::ParameterCount {
                expected: self.layout.param_count(),
                actual: layout.param_count(),
            });
        }
        Ok(Self {
            exact: Program::compile(&layout, &self.noise, Mode::Exact),
            first_order: Program::compile(&layout, &first_order_noise(&self.noise), Mode::FirstOrder),
            layout,
            ..self.clone()
        })
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn variant(&self) -> AnsatzVariant {
        self.variant
    }

    pub fn layout(&self) -> &CircuitLayout {
        &self.layout
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn ground_truth(&self) -> Option<&GroundTruth> {
        self.ground_truth.as_ref()
    }

    pub fn lowest_eigenvalue(&self) -> f64 {
        self.lowest_eigenvalue
    }

    pub fn num_params(&self) -> usize {
        self.variant.num_params()
    }

    fn layout_theta(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.num_params() {
            return Err(Error::ParameterCount {
                expected: self.num_params(),
                actual: theta.len(),
            });
        }
        Ok(self.variant.expand(theta))
    }
}

fn first_order_noise(noise: &NoiseModel) -> NoiseModel {
    NoiseModel::bit_flip(noise.p_x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostValue {
    pub energy: f64,
    pub overlap: Option<f64>,
}

/// Tr(ρ(θ) H).
pub fn energy(ctx: &CostContext, theta: &[f64]) -> Result<f64> {
    let full = ctx.layout_theta(theta)?;
    Ok(ctx.exact.energy(&full, ctx.hamiltonian.matrix()))
}

/// Energy checked against the variational bound and the imaginary residual.
pub fn cost_value(ctx: &CostContext, theta: &[f64]) -> Result<CostValue> {
    let full = ctx.layout_theta(theta)?;
    let rho = simulate(&ctx.layout, &full, &ctx.noise)?;
    let e = expectation_with(&rho, &ctx.hamiltonian, &ctx.tolerances)?;
    if e < ctx.lowest_eigenvalue - 1e-9 {
        return Err(Error::Numerical(format!(
            "energy {e} below the ground energy {}",
            ctx.lowest_eigenvalue
        )));
    }
    let overlap = ctx
        .ground_truth
        .as_ref()
        .map(|g| g.projector_weight(rho.matrix()).clamp(0.0, 1.0));
    Ok(CostValue { energy: e, overlap })
}

/// (1 − n_ℓ N p_x) Tr(ρ₀H) + p_x Tr(ρ₁H) with ρ₁ summed over every
/// single-flip trajectory (one per layer and qubit).
pub fn energy_perturbative(ctx: &CostContext, theta: &[f64], p_x: f64) -> Result<f64> {
    let full = ctx.layout_theta(theta)?;
    let layout = &ctx.layout;
    let h = ctx.hamiltonian.matrix();
    let n = layout.num_qubits();
    let rho0 = simulate(layout, &full, &NoiseModel::noiseless())?;
    let e0 = rho0.matrix().trace_product(h).re;
    let mut e1 = 0.0;
    for prefix in simulate_error_free_prefixes(layout, &full)? {
        for j in 0..n {
            let flipped = prefix.state.flipped(j);
            let out = prefix.apply_suffix(layout, &flipped, &full);
            e1 += out.trace_product(h).re;
        }
    }
    let scale = (layout.num_layers() * n) as f64;
    Ok((1.0 - scale * p_x) * e0 + p_x * e1)
}

/// Perturbative cost at the context's own p_x, via the first-order
/// propagation of (ρ₀, ρ₁) through the circuit.
pub fn energy_perturbative_propagated(ctx: &CostContext, theta: &[f64]) -> Result<f64> {
    let full = ctx.layout_theta(theta)?;
    Ok(ctx.first_order.energy(&full, ctx.hamiltonian.matrix()))
}

/// ∂E/∂θ_k = [E(θ + π/2 e_k) − E(θ − π/2 e_k)] / 2 for every k.
pub fn gradient(ctx: &CostContext, theta: &[f64]) -> Result<Vec<f64>> {
    Ok(energy_and_gradient(ctx, theta, CostKind::Exact)?.1)
}

/// Shift-rule gradient by re-simulating both shifted circuits for every
/// layout parameter. Slow; kept as the reference for `gradient`.
pub fn gradient_reference(ctx: &CostContext, theta: &[f64]) -> Result<Vec<f64>> {
    let full = ctx.layout_theta(theta)?;
    let h = ctx.hamiltonian.matrix();
    let mut layout_grad = Vec::with_capacity(full.len());
    for k in 0..full.len() {
        let mut plus = full.clone();
        let mut minus = full.clone();
        plus[k] += FRAC_PI_2;
        minus[k] -= FRAC_PI_2;
        layout_grad.push(0.5 * (ctx.exact.energy(&plus, h) - ctx.exact.energy(&minus, h)));
    }
    Ok(ctx.variant.pullback_gradient(&layout_grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    Exact,
    Perturbative,
}

pub fn energy_and_gradient(
    ctx: &CostContext,
    theta: &[f64],
    kind: CostKind,
) -> Result<(f64, Vec<f64>)> {
    let full = ctx.layout_theta(theta)?;
    let prog = match kind {
        CostKind::Exact => &ctx.exact,
        CostKind::Perturbative => &ctx.first_order,
    };
    let (e, g) = prog.energy_and_gradient(&full, ctx.hamiltonian.matrix());
    Ok((e, ctx.variant.pullback_gradient(&g)))
}

/// ⟨φ_g|ρ(θ)|φ_g⟩, or Tr(P_g ρ) for a degenerate ground space.
pub fn overlap(ctx: &CostContext, theta: &[f64]) -> Result<f64> {
    let ground = ctx.ground_truth.as_ref().ok_or(Error::MissingGroundTruth)?;
    let full = ctx.layout_theta(theta)?;
    let rho = simulate(&ctx.layout, &full, &ctx.noise)?;
    Ok(ground.projector_weight(rho.matrix()).clamp(0.0, 1.0))
}

/// Cost of a context as an optimizer objective.
pub struct EnergyObjective<'a> {
    ctx: &'a CostContext,
    kind: CostKind,
}

impl<'a> EnergyObjective<'a> {
    pub fn new(ctx: &'a CostContext, kind: CostKind) -> Self {
        Self { ctx, kind }
    }

    pub fn exact(ctx: &'a CostContext) -> Self {
        Self::new(ctx, CostKind::Exact)
    }
}

impl Objective for EnergyObjective<'_> {
    fn dim(&self) -> usize {
        self.ctx.num_params()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let full = self.ctx.variant.expand(x);
        let h = self.ctx.hamiltonian.matrix();
        match self.kind {
            CostKind::Exact => self.ctx.exact.energy(&full, h),
            CostKind::Perturbative => self.ctx.first_order.energy(&full, h),
        }
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        energy_and_gradient(self.ctx, x, self.kind).expect("objective dimension checked by caller")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{expand_two_param, wrap_angles};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn dimer(variant: AnsatzVariant, p_x: f64) -> CostContext {
        CostContext::new(variant, &SpinChainSpec::unit(2), NoiseModel::bit_flip(p_x)).unwrap()
    }

    fn random_theta(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-3.2..3.2)).collect()
    }

    #[test]
    fn all_zero_dimer_energy_by_hand() {
        let ctx = dimer(AnsatzVariant::Dimer8, 0.0);
        assert_abs_diff_eq!(energy(&ctx, &[0.0; 8]).unwrap(), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn variational_bound() {
        for (i, p) in [0.0, 0.05, 0.3, 0.5].iter().enumerate() {
            let ctx = dimer(AnsatzVariant::Dimer8, *p);
            for s in 0..20 {
                let th = random_theta(8, 100 * i as u64 + s);
                let v = cost_value(&ctx, &th).unwrap();
                assert!(v.energy >= -3.0 - 1e-9);
                let f = v.overlap.unwrap();
                assert!((0.0..=1.0).contains(&f));
            }
        }
    }

    #[test]
    fn repeated_full_flips_drive_energy_to_zero() {
        // p_x = 1/N at every marker of a deep ansatz mixes toward I/2^N.
        let chain = SpinChainSpec::unit(2);
        let ctx = CostContext::new(
            AnsatzVariant::General {
                num_qubits: 2,
                num_layers: 30,
            },
            &chain,
            NoiseModel::bit_flip(0.5),
        )
        .unwrap();
        let th = random_theta(ctx.num_params(), 4);
        assert!(energy(&ctx, &th).unwrap().abs() < 0.05);
    }

    #[test]
    fn dimer2_is_constrained_dimer8() {
        let c2 = dimer(AnsatzVariant::Dimer2, 0.06);
        let c8 = dimer(AnsatzVariant::Dimer8, 0.06);
        for s in 0..10 {
            let t = random_theta(2, s);
            let e2 = energy(&c2, &t).unwrap();
            let e8 = energy(&c8, &expand_two_param(t[0], t[1])).unwrap();
            assert_eq!(e2, e8);
        }
    }

    #[test]
    fn perturbative_equals_exact_at_zero_rate() {
        let ctx = CostContext::new(
            AnsatzVariant::General {
                num_qubits: 3,
                num_layers: 2,
            },
            &SpinChainSpec::unit(3),
            NoiseModel::noiseless(),
        )
        .unwrap();
        let th = random_theta(22, 9);
        assert_abs_diff_eq!(
            energy_perturbative(&ctx, &th, 0.0).unwrap(),
            energy(&ctx, &th).unwrap(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn perturbative_routes_agree() {
        let chain = SpinChainSpec::unit(3);
        let variant = AnsatzVariant::General {
            num_qubits: 3,
            num_layers: 2,
        };
        let ctx = CostContext::new(variant, &chain, NoiseModel::bit_flip(0.03)).unwrap();
        for s in 0..5 {
            let th = random_theta(22, 50 + s);
            let traj = energy_perturbative(&ctx, &th, 0.03).unwrap();
            let prop = energy_perturbative_propagated(&ctx, &th).unwrap();
            assert_abs_diff_eq!(traj, prop, epsilon = 1e-12);
        }
    }

    #[test]
    fn shift_rule_matches_reference_and_finite_differences() {
        let ctx = dimer(AnsatzVariant::Dimer8, 0.05);
        let th = random_theta(8, 21);
        let fast = gradient(&ctx, &th).unwrap();
        let slow = gradient_reference(&ctx, &th).unwrap();
        for k in 0..8 {
            assert_abs_diff_eq!(fast[k], slow[k], epsilon = 1e-13);
            let mut a = th.clone();
            let mut b = th.clone();
            a[k] += 1e-5;
            b[k] -= 1e-5;
            let fd = (energy(&ctx, &a).unwrap() - energy(&ctx, &b).unwrap()) / 2e-5;
            assert_abs_diff_eq!(fast[k], fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn dimer2_gradient_via_chain_rule() {
        let ctx = dimer(AnsatzVariant::Dimer2, 0.02);
        for t in [[0.0, 0.0], [0.4, -1.3]] {
            let g = gradient(&ctx, &t).unwrap();
            for k in 0..2 {
                let mut a = t;
                let mut b = t;
                a[k] += 1e-5;
                b[k] -= 1e-5;
                let fd = (energy(&ctx, &a).unwrap() - energy(&ctx, &b).unwrap()) / 2e-5;
                assert_abs_diff_eq!(g[k], fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn periodicity() {
        let ctx = dimer(AnsatzVariant::Dimer8, 0.07);
        let th = random_theta(8, 3);
        let e = energy(&ctx, &th).unwrap();
        let g = gradient(&ctx, &th).unwrap();
        for k in 0..8 {
            let mut shifted = th.clone();
            shifted[k] += 2.0 * std::f64::consts::PI;
            assert_abs_diff_eq!(energy(&ctx, &shifted).unwrap(), e, epsilon = 1e-10);
            let gs = gradient(&ctx, &shifted).unwrap();
            for (a, b) in g.iter().zip(&gs) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
        let wrapped = wrap_angles(&th.iter().map(|t| t + 6.0 * std::f64::consts::PI).collect::<Vec<_>>());
        assert_abs_diff_eq!(energy(&ctx, &wrapped).unwrap(), e, epsilon = 1e-10);
    }

    #[test]
    fn overlap_cases() {
        let ctx = dimer(AnsatzVariant::Dimer8, 0.0);
        // Mixed state: weight of a single ground vector is 1/4.
        let g = ctx.ground_truth().unwrap();
        let mixed = crate::qcore::DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(g.projector_weight(mixed.matrix()), 0.25, epsilon = 1e-15);
        // The ground state itself.
        let rho = g.state.to_density();
        assert_abs_diff_eq!(g.projector_weight(rho.matrix()), 1.0, epsilon = 1e-12);

        let no_truth = CostContext::from_parts(
            AnsatzVariant::Dimer8,
            ctx.hamiltonian().clone(),
            NoiseModel::noiseless(),
            None,
        )
        .unwrap();
        assert!(matches!(
            overlap(&no_truth, &[0.0; 8]),
            Err(Error::MissingGroundTruth)
        ));
    }

    #[test]
    fn degenerate_ground_space_overlap() {
        // Zero Hamiltonian: the whole space is the ground space.
        let h = HermitianOperator::new(crate::qcore::CMatrix::zeros(4)).unwrap();
        let g = exact_ground(&h).unwrap();
        assert!(g.degenerate);
        assert_eq!(g.degeneracy(), 4);
        let ctx = CostContext::from_parts(AnsatzVariant::Dimer8, h, NoiseModel::bit_flip(0.2), Some(g))
            .unwrap();
        assert_abs_diff_eq!(overlap(&ctx, &random_theta(8, 1)).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mismatched_chain_is_rejected() {
        assert!(CostContext::new(
            AnsatzVariant::Dimer8,
            &SpinChainSpec::unit(3),
            NoiseModel::noiseless()
        )
        .is_err());
    }
}
