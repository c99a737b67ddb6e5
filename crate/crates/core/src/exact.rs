//! Full-Hilbert-space single-photon scattering.
//!
//! The ensemble after one photon is `[δ_{νν'} + σ_{ν'}^{tot} G(ω) σ_ν^{tot,†}] ψ`
//! with `G(ω) = iγ_1D (H₁ − ω)^{-1}` on the single-excited space. `H₁` is
//! `(ω₀ − iγ)·1 − i(γ_1D/2)·M`, where `M = Σ_ν σ_ν^{tot,†}σ_ν^{tot}` restricted
//! to one excitation is a real symmetric integer matrix.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::model::{
    apply_lowering, apply_raising, ground_dim, ExcitedVector, GroundDensityMatrix,
    GroundStateVector, MeasurementBasis, PolarizationLabel, SingleExcitedBasis, C64,
};
use crate::params::PhysicalParams;

/// Largest ensemble for which `H₁` is built densely (dimension 5120).
pub const MAX_EXACT_ATOMS: usize = 10;

/// Probabilities with magnitude below this are snapped to zero.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Below this `|ω₀ − iγ − ω|` (in units of `γ_1D`) the Green function is
/// evaluated spectrally on the coupled subspace instead of by LU.
const SINGULAR_SHIFT: f64 = 1e-4;

/// Relative size below which an eigenvalue of `M` counts as zero.
const KERNEL_TOLERANCE: f64 = 1e-9;

/// Single-excited basis together with `M` and `H₁`.
#[derive(Debug, Clone)]
pub struct SingleExcitedWorkspace {
    params: PhysicalParams,
    basis: SingleExcitedBasis,
    coupling: DMatrix<f64>,
    /// Coefficient of `M` in `H₁`, normally `−iγ_1D/2`.
    rate: C64,
    h1: DMatrix<C64>,
}

fn assemble_h1(params: &PhysicalParams, coupling: &DMatrix<f64>, rate: C64) -> DMatrix<C64> {
    let shift = C64::new(params.omega0, -params.gamma);
    let dim = coupling.nrows();
    DMatrix::from_fn(dim, dim, |r, c| {
        let d = if r == c { shift } else { C64::new(0.0, 0.0) };
        d + rate * coupling[(r, c)]
    })
}

/// `M_{ab} = Σ_ν ⟨a|σ_ν^{tot,†}σ_ν^{tot}|b⟩` over the single-excited basis.
pub fn coupling_matrix(n_at: usize) -> DMatrix<f64> {
    let basis = SingleExcitedBasis::new(n_at);
    let dim = basis.dim();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for b in 0..dim {
        let (atom, rest) = basis.entry(b);
        // lower through leg `bit`, then re-excite any atom sitting in that leg
        for bit in 0..2 {
            let g = crate::model::basis_insert_bit(rest, atom, bit);
            for other in 0..n_at {
                if (g >> other) & 1 == bit {
                    m[(basis.excite(g, other), b)] += 1.0;
                }
            }
        }
    }
    m
}

/// Builds the workspace for `params`.
pub fn build_h1(params: &PhysicalParams) -> Result<SingleExcitedWorkspace> {
    params.validate()?;
    if params.n_at > MAX_EXACT_ATOMS {
        return Err(ZenoError::ResourceLimit(format!(
            "exact engine supports at most {MAX_EXACT_ATOMS} atoms, got {}",
            params.n_at
        )));
    }
    let basis = SingleExcitedBasis::new(params.n_at);
    let coupling = coupling_matrix(params.n_at);
    let rate = C64::new(0.0, -params.gamma1d / 2.0);
    let h1 = assemble_h1(params, &coupling, rate);
    Ok(SingleExcitedWorkspace {
        params: *params,
        basis,
        coupling,
        rate,
        h1,
    })
}

impl SingleExcitedWorkspace {
    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn basis(&self) -> &SingleExcitedBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    pub fn h1(&self) -> &DMatrix<C64> {
        &self.h1
    }

    /// Fault injection for self-tests: negates the dissipative `M` term of
    /// `H₁` while keeping the Green-function prefactor, which breaks
    /// unitarity at `γ = 0`.
    #[doc(hidden)]
    pub fn with_flipped_dissipation(mut self) -> Self {
        self.rate = -self.rate;
        self.h1 = assemble_h1(&self.params, &self.coupling, self.rate);
        self
    }
}

enum Solver {
    Lu(nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>),
    Spectral {
        vectors: DMatrix<C64>,
        inverse: DVector<C64>,
        kernel: Vec<usize>,
    },
}

/// `G(ω)` prepared for repeated application at one frequency.
pub struct GreenFunction {
    prefactor: C64,
    dim: usize,
    solver: Solver,
}

impl GreenFunction {
    pub fn new(ws: &SingleExcitedWorkspace, omega: f64) -> Result<Self> {
        let p = ws.params();
        let prefactor = C64::new(0.0, p.gamma1d);
        let shift = C64::new(p.omega0 - omega, -p.gamma);
        let dim = ws.dim();
        let solver = if shift.norm() >= SINGULAR_SHIFT * p.gamma1d {
            let a = &ws.h1 - DMatrix::<C64>::identity(dim, dim) * C64::new(omega, 0.0);
            Solver::Lu(a.lu())
        } else {
            // H₁ − ω = shift − i(γ_1D/2)M is diagonal in the eigenbasis of M
            let eig = SymmetricEigen::new(ws.coupling.clone());
            let scale = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1.0);
            let mut kernel = Vec::new();
            let inverse = DVector::from_iterator(
                dim,
                eig.eigenvalues.iter().enumerate().map(|(k, &lambda)| {
                    let d = shift + ws.rate * lambda;
                    if lambda.abs() < KERNEL_TOLERANCE * scale && d.norm() < SINGULAR_SHIFT {
                        kernel.push(k);
                        C64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                }),
            );
            Solver::Spectral {
                vectors: eig.eigenvectors.map(|x| C64::new(x, 0.0)),
                inverse,
                kernel,
            }
        };
        Ok(Self {
            prefactor,
            dim,
            solver,
        })
    }

    /// `G(ω)` applied to each column of `rhs`.
    pub fn apply_columns(&self, rhs: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if rhs.nrows() != self.dim {
            return Err(ZenoError::InvalidState(format!(
                "right-hand side has {} rows, expected {}",
                rhs.nrows(),
                self.dim
            )));
        }
        let x = match &self.solver {
            Solver::Lu(lu) => lu
                .solve(rhs)
                .ok_or_else(|| ZenoError::NumericalSingularity("H₁ − ω is singular".into()))?,
            Solver::Spectral {
                vectors,
                inverse,
                kernel,
            } => {
                let mut coeffs = vectors.adjoint() * rhs;
                for col in 0..rhs.ncols() {
                    let norm = rhs.column(col).norm();
                    for &k in kernel {
                        if coeffs[(k, col)].norm() > KERNEL_TOLERANCE * norm.max(1e-300) {
                            return Err(ZenoError::NumericalSingularity(
                                "source overlaps a decoupled state at its real resonance".into(),
                            ));
                        }
                    }
                }
                for (k, inv) in inverse.iter().enumerate() {
                    for col in 0..coeffs.ncols() {
                        coeffs[(k, col)] *= inv;
                    }
                }
                vectors * coeffs
            }
        };
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(ZenoError::NumericalSingularity(
                "Green function produced non-finite amplitudes".into(),
            ));
        }
        Ok(x * self.prefactor)
    }

    pub fn apply(&self, v: &ExcitedVector) -> Result<ExcitedVector> {
        let rhs = DMatrix::from_column_slice(v.dim(), 1, v.amplitudes().as_slice());
        let x = self.apply_columns(&rhs)?;
        ExcitedVector::new(v.n_at(), x.column(0).into_owned())
    }
}

/// `iγ_1D (H₁ − ω)^{-1} v`.
pub fn green_apply(
    ws: &SingleExcitedWorkspace,
    omega: f64,
    v: &ExcitedVector,
) -> Result<ExcitedVector> {
    if v.n_at() != ws.params().n_at {
        return Err(ZenoError::InvalidState(format!(
            "vector for {} atoms applied to a {}-atom workspace",
            v.n_at(),
            ws.params().n_at
        )));
    }
    GreenFunction::new(ws, omega)?.apply(v)
}

fn clip_probability(p: f64) -> f64 {
    if p.abs() < PROBABILITY_TOLERANCE {
        0.0
    } else {
        p
    }
}

#[derive(Debug, Clone)]
pub struct ScatterBranch {
    pub out_pol: PolarizationLabel,
    /// Unnormalized post-scattering ground state.
    pub state: GroundStateVector,
    pub probability: f64,
}

#[derive(Debug, Clone)]
pub struct ScatterOutcome {
    pub in_pol: PolarizationLabel,
    pub basis: MeasurementBasis,
    pub branches: [ScatterBranch; 2],
    /// Probability that the photon is lost to nonradiative decay.
    pub loss: f64,
}

impl ScatterOutcome {
    pub fn branch(&self, out_pol: PolarizationLabel) -> Option<&ScatterBranch> {
        self.branches.iter().find(|b| b.out_pol == out_pol)
    }

    pub fn probability(&self, out_pol: PolarizationLabel) -> f64 {
        self.branch(out_pol).map_or(0.0, |b| b.probability)
    }

    pub fn total_reflection(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}

fn scatter_with(
    ws: &SingleExcitedWorkspace,
    green: &GreenFunction,
    ground: &GroundStateVector,
    in_pol: PolarizationLabel,
    basis: MeasurementBasis,
) -> Result<ScatterOutcome> {
    if ground.n_at() != ws.params().n_at {
        return Err(ZenoError::InvalidState(format!(
            "{}-atom state scattered on a {}-atom ensemble",
            ground.n_at(),
            ws.params().n_at
        )));
    }
    let excited = green.apply(&apply_raising(ground, in_pol))?;
    let branch = |out_pol: PolarizationLabel| {
        let mut amps = apply_lowering(&excited, out_pol).into_amplitudes();
        if out_pol == in_pol {
            amps += ground.amplitudes();
        }
        let state = GroundStateVector::new(ground.n_at(), amps).expect("same dimension");
        let probability = clip_probability(state.norm_sqr());
        ScatterBranch {
            out_pol,
            state,
            probability,
        }
    };
    let [a, b] = basis.labels();
    let branches = [branch(a), branch(b)];
    let loss =
        clip_probability(ground.norm_sqr() - branches[0].probability - branches[1].probability);
    Ok(ScatterOutcome {
        in_pol,
        basis,
        branches,
        loss,
    })
}

/// Scatters one photon of polarization `in_pol` at `params.omega` and
/// resolves the outgoing photon in `basis`.
pub fn scatter(
    ground: &GroundStateVector,
    in_pol: PolarizationLabel,
    basis: MeasurementBasis,
    params: &PhysicalParams,
) -> Result<ScatterOutcome> {
    let ws = build_h1(params)?;
    scatter_in(&ws, ground, in_pol, basis)
}

/// Same as [`scatter`] with a prebuilt workspace.
pub fn scatter_in(
    ws: &SingleExcitedWorkspace,
    ground: &GroundStateVector,
    in_pol: PolarizationLabel,
    basis: MeasurementBasis,
) -> Result<ScatterOutcome> {
    let green = GreenFunction::new(ws, ws.params().omega)?;
    scatter_with(ws, &green, ground, in_pol, basis)
}

/// What happens to the ensemble when the photon is not returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LossPolicy {
    /// Drop the lost branch and renormalize over the reflected ones.
    #[default]
    Discard,
    /// Move the lost population into the dark state; only meaningful in the
    /// two-state collective model.
    PaperReduced,
}

impl LossPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            LossPolicy::Discard => "discard",
            LossPolicy::PaperReduced => "paper-reduced",
        }
    }
}

impl std::str::FromStr for LossPolicy {
    type Err = ZenoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discard" => Ok(LossPolicy::Discard),
            "paper-reduced" => Ok(LossPolicy::PaperReduced),
            other => Err(ZenoError::InvalidParameter(format!(
                "unknown loss policy '{other}'"
            ))),
        }
    }
}

/// Branch probabilities of one channel application, before renormalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub outcomes: [(PolarizationLabel, f64); 2],
    pub loss: f64,
}

impl StepRecord {
    pub fn probability(&self, pol: PolarizationLabel) -> f64 {
        self.outcomes
            .iter()
            .find(|(p, _)| *p == pol)
            .map_or(0.0, |(_, r)| *r)
    }

    pub fn reflected(&self) -> f64 {
        self.outcomes.iter().map(|(_, r)| r).sum()
    }
}

/// Matrix of `σ_ν^{tot,†}`: single-excited rows, ground columns.
pub fn raising_matrix(n_at: usize, pol: PolarizationLabel) -> DMatrix<C64> {
    let basis = SingleExcitedBasis::new(n_at);
    let mut a = DMatrix::<C64>::zeros(basis.dim(), ground_dim(n_at));
    for g in 0..ground_dim(n_at) {
        for atom in 0..n_at {
            let w = pol.weight((g >> atom) & 1);
            if w != 0.0 {
                a[(basis.excite(g, atom), g)] += C64::new(w, 0.0);
            }
        }
    }
    a
}

/// The two Kraus operators of one photon with fixed input polarization.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    n_at: usize,
    in_pol: PolarizationLabel,
    basis: MeasurementBasis,
    operators: [(PolarizationLabel, DMatrix<C64>); 2],
}

impl KrausChannel {
    pub fn new(
        params: &PhysicalParams,
        in_pol: PolarizationLabel,
        basis: MeasurementBasis,
    ) -> Result<Self> {
        Self::from_workspace(&build_h1(params)?, in_pol, basis)
    }

    pub fn from_workspace(
        ws: &SingleExcitedWorkspace,
        in_pol: PolarizationLabel,
        basis: MeasurementBasis,
    ) -> Result<Self> {
        let n = ws.params().n_at;
        let green = GreenFunction::new(ws, ws.params().omega)?;
        let propagated = green.apply_columns(&raising_matrix(n, in_pol))?;
        let dim = ground_dim(n);
        let op = |out_pol: PolarizationLabel| {
            let mut k = raising_matrix(n, out_pol).transpose() * &propagated;
            if out_pol == in_pol {
                k += DMatrix::<C64>::identity(dim, dim);
            }
            (out_pol, k)
        };
        let [a, b] = basis.labels();
        Ok(Self {
            n_at: n,
            in_pol,
            basis,
            operators: [op(a), op(b)],
        })
    }

    pub fn n_at(&self) -> usize {
        self.n_at
    }

    pub fn in_pol(&self) -> PolarizationLabel {
        self.in_pol
    }

    pub fn basis(&self) -> MeasurementBasis {
        self.basis
    }

    pub fn operators(&self) -> &[(PolarizationLabel, DMatrix<C64>); 2] {
        &self.operators
    }

    pub fn operator(&self, out_pol: PolarizationLabel) -> Option<&DMatrix<C64>> {
        self.operators
            .iter()
            .find(|(p, _)| *p == out_pol)
            .map(|(_, k)| k)
    }

    /// `K ρ K†` for a single outcome, unnormalized.
    pub fn branch(
        &self,
        rho: &GroundDensityMatrix,
        out_pol: PolarizationLabel,
    ) -> Result<GroundDensityMatrix> {
        let k = self.operator(out_pol).ok_or_else(|| {
            ZenoError::InvalidSpec(format!("{out_pol} is not in the {} basis", self.basis))
        })?;
        GroundDensityMatrix::new(self.n_at, k * rho.matrix() * k.adjoint())
    }

    /// One channel application. Returns the renormalized state and the
    /// branch probabilities relative to the incoming trace.
    pub fn step(
        &self,
        rho: &GroundDensityMatrix,
        policy: LossPolicy,
    ) -> Result<(GroundDensityMatrix, StepRecord)> {
        if rho.n_at() != self.n_at {
            return Err(ZenoError::InvalidState(format!(
                "{}-atom density matrix on a {}-atom channel",
                rho.n_at(),
                self.n_at
            )));
        }
        if policy != LossPolicy::Discard {
            return Err(ZenoError::InvalidSpec(
                "the exact engine only supports the discard loss policy".into(),
            ));
        }
        let tr = rho.trace();
        if !(tr > 0.0) {
            return Err(ZenoError::DegenerateState(
                "input density matrix has zero trace".into(),
            ));
        }
        let dim = ground_dim(self.n_at);
        let mut next = DMatrix::<C64>::zeros(dim, dim);
        let mut outcomes = [(self.operators[0].0, 0.0), (self.operators[1].0, 0.0)];
        for ((_, k), slot) in self.operators.iter().zip(outcomes.iter_mut()) {
            let part = k * rho.matrix() * k.adjoint();
            slot.1 = clip_probability(part.diagonal().iter().map(|z| z.re).sum::<f64>() / tr);
            next += part;
        }
        let reflected = outcomes[0].1 + outcomes[1].1;
        let loss = clip_probability(1.0 - reflected);
        if !(reflected > f64::MIN_POSITIVE) {
            return Err(ZenoError::DegenerateState(
                "every photon was lost; nothing to condition on".into(),
            ));
        }
        let next = GroundDensityMatrix::new(self.n_at, next)?.normalized()?;
        Ok((next, StepRecord { outcomes, loss }))
    }

    /// Pure-state application through the stored operators.
    pub fn apply_pure(
        &self,
        ground: &GroundStateVector,
        out_pol: PolarizationLabel,
    ) -> Result<GroundStateVector> {
        let k = self.operator(out_pol).ok_or_else(|| {
            ZenoError::InvalidSpec(format!("{out_pol} is not in the {} basis", self.basis))
        })?;
        GroundStateVector::new(self.n_at, k * ground.amplitudes())
    }
}

/// Builds the channel for `in_pol` (resolved in the basis that contains it)
/// and applies it once.
pub fn kraus_step(
    rho: &GroundDensityMatrix,
    in_pol: PolarizationLabel,
    params: &PhysicalParams,
    policy: LossPolicy,
) -> Result<(GroundDensityMatrix, StepRecord)> {
    KrausChannel::new(params, in_pol, MeasurementBasis::of(in_pol))?.step(rho, policy)
}
