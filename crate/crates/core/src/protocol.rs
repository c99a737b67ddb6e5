//! Photon-by-photon protocols.
//!
//! A protocol starts from a ground state (normally the dark state), sends a
//! short prelude of photons (normally one `σ₊` photon heralded on its `σ₋`
//! reflection), then drives the ensemble with `N_V` photons of `V`
//! polarization. A static field may rotate the pseudospin by `exp(iφS_y)`
//! between consecutive photons.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collective::{
    circular_kick_branches, first_photon_state, polarizability, reduced_step_with,
    ReducedDensityMatrix,
};
use crate::error::{Result, ZenoError};
use crate::exact::{build_h1, KrausChannel, LossPolicy};
use crate::model::{
    apply_local, dark_state, spin_expectations_density, GroundDensityMatrix, GroundStateVector,
    MeasurementBasis, PolarizationLabel, SpinObservables, C64,
};
use crate::params::PhysicalParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InitialState {
    #[default]
    Dark,
    /// Little-endian ground amplitudes; normalized on use.
    Custom { amplitudes: Vec<C64> },
}

/// How the outgoing photon of a prelude event is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "pol")]
pub enum PreludeOutcome {
    /// Keep only the branch where the photon left with this polarization.
    Heralded(PolarizationLabel),
    /// Keep both reflected branches.
    Unconditioned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonEvent {
    pub pol: PolarizationLabel,
    /// Photon frequency; `None` uses the protocol frequency.
    #[serde(default)]
    pub omega: Option<f64>,
    pub outcome: PreludeOutcome,
}

impl PhotonEvent {
    /// A `σ₊` photon heralded on a `σ₋` reflection.
    pub fn kick() -> Self {
        Self {
            pol: PolarizationLabel::Plus,
            omega: None,
            outcome: PreludeOutcome::Heralded(PolarizationLabel::Minus),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    #[default]
    Exact,
    Collective,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Collective => "collective",
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = ZenoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Engine::Exact),
            "collective" => Ok(Engine::Collective),
            other => Err(ZenoError::InvalidParameter(format!(
                "unknown engine '{other}'"
            ))),
        }
    }
}

/// What happens at each of the `n_v` drive steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DriveMode {
    /// Field rotation followed by one `V` photon.
    #[default]
    Photons,
    /// Field rotation only.
    FreeRotation,
}

impl DriveMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DriveMode::Photons => "photons",
            DriveMode::FreeRotation => "free-rotation",
        }
    }
}

impl std::str::FromStr for DriveMode {
    type Err = ZenoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "photons" => Ok(DriveMode::Photons),
            "free-rotation" => Ok(DriveMode::FreeRotation),
            other => Err(ZenoError::InvalidParameter(format!(
                "unknown drive mode '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub params: PhysicalParams,
    #[serde(default)]
    pub initial: InitialState,
    pub prelude: Vec<PhotonEvent>,
    pub n_v: usize,
    /// Rotation angle of `exp(iφS_y)` between photons.
    #[serde(default)]
    pub field_phase: f64,
    #[serde(default)]
    pub drive: DriveMode,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub loss_policy: LossPolicy,
}

impl ProtocolSpec {
    /// Dark state, one heralded `σ₊` kick, then `n_v` `V` photons.
    pub fn kicked(params: PhysicalParams, n_v: usize) -> Self {
        Self {
            params,
            initial: InitialState::Dark,
            prelude: vec![PhotonEvent::kick()],
            n_v,
            field_phase: 0.0,
            drive: DriveMode::Photons,
            engine: Engine::Exact,
            loss_policy: LossPolicy::Discard,
        }
    }

    pub fn with_engine(mut self, engine: Engine, loss_policy: LossPolicy) -> Self {
        self.engine = engine;
        self.loss_policy = loss_policy;
        self
    }

    pub fn with_field_phase(mut self, phi: f64) -> Self {
        self.field_phase = phi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let phi = self.field_phase;
        if !(phi > -std::f64::consts::PI && phi <= std::f64::consts::PI) {
            return Err(ZenoError::InvalidParameter(format!(
                "field_phase must lie in (-pi, pi], got {phi}"
            )));
        }
        for ev in &self.prelude {
            if let Some(w) = ev.omega {
                if !w.is_finite() {
                    return Err(ZenoError::InvalidParameter(
                        "prelude omega must be finite".into(),
                    ));
                }
            }
            if let PreludeOutcome::Heralded(out) = ev.outcome {
                if !MeasurementBasis::of(ev.pol).contains(out) {
                    return Err(ZenoError::InvalidSpec(format!(
                        "cannot herald {out} for a {} photon",
                        ev.pol
                    )));
                }
            }
        }
        if let InitialState::Custom { amplitudes } = &self.initial {
            if amplitudes.len() != 1usize << self.params.n_at.min(usize::BITS as usize - 1) {
                return Err(ZenoError::InvalidState(format!(
                    "custom state has {} amplitudes, expected 2^{}",
                    amplitudes.len(),
                    self.params.n_at
                )));
            }
        }
        match self.engine {
            Engine::Exact => {
                if self.loss_policy != LossPolicy::Discard {
                    return Err(ZenoError::InvalidSpec(
                        "the exact engine only supports the discard loss policy".into(),
                    ));
                }
            }
            Engine::Collective => {
                if self.field_phase != 0.0 {
                    return Err(ZenoError::InvalidSpec(
                        "the collective engine needs field_phase = 0".into(),
                    ));
                }
                if self.initial != InitialState::Dark {
                    return Err(ZenoError::InvalidSpec(
                        "the collective engine starts from the dark state".into(),
                    ));
                }
                if self.prelude.len() > 1
                    || self
                        .prelude
                        .iter()
                        .any(|e| e.pol != PolarizationLabel::Plus)
                {
                    return Err(ZenoError::InvalidSpec(
                        "the collective engine allows at most one sigma+ prelude photon".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Probabilities of one prelude photon, relative to the state it met.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreludeRecord {
    pub pol: PolarizationLabel,
    pub outcome: PreludeOutcome,
    /// Probability of the kept branch(es).
    pub probability: f64,
    pub loss: f64,
}

/// Row `j` describes the state after `j` drive steps; row 0 is the state
/// after the prelude and has zero probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n_v: usize,
    pub r_vh: f64,
    pub r_vv: f64,
    pub loss: f64,
    pub n_tot_h: f64,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTrace {
    pub prelude: Vec<PreludeRecord>,
    pub rows: Vec<TraceRow>,
}

impl ProtocolTrace {
    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace always has the initial row")
    }
}

/// `exp(iφ s_y)` in the `|+⟩, |−⟩` basis.
pub fn single_rotation(phi: f64) -> [[C64; 2]; 2] {
    let (s, c) = (phi / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(c, 0.0)],
    ]
}

fn rotate_amplitudes(amps: &DVector<C64>, n_at: usize, local: &[[C64; 2]; 2]) -> DVector<C64> {
    let mut v = amps.clone();
    for atom in 0..n_at {
        v = apply_local(&v, atom, local);
    }
    v
}

fn rotate_columns(m: &DMatrix<C64>, n_at: usize, local: &[[C64; 2]; 2]) -> DMatrix<C64> {
    let mut out = m.clone();
    for (mut col, src) in out.column_iter_mut().zip(m.column_iter()) {
        col.copy_from(&rotate_amplitudes(&src.clone_owned(), n_at, local));
    }
    out
}

/// Trait for things a field rotation acts on.
pub trait FieldRotation: Sized {
    fn field_rotation(&self, phi: f64) -> Self;
}

impl FieldRotation for GroundStateVector {
    fn field_rotation(&self, phi: f64) -> Self {
        if phi == 0.0 {
            return self.clone();
        }
        let amps = rotate_amplitudes(self.amplitudes(), self.n_at(), &single_rotation(phi));
        GroundStateVector::new(self.n_at(), amps).expect("dimension preserved")
    }
}

impl FieldRotation for GroundDensityMatrix {
    fn field_rotation(&self, phi: f64) -> Self {
        if phi == 0.0 {
            return self.clone();
        }
        let u = single_rotation(phi);
        // U ρ U† = (U (U ρ)†)†
        let left = rotate_columns(self.matrix(), self.n_at(), &u);
        let both = rotate_columns(&left.adjoint(), self.n_at(), &u).adjoint();
        GroundDensityMatrix::new(self.n_at(), both).expect("dimension preserved")
    }
}

/// Applies `⊗_j exp(iφ s_y^{(j)})`.
pub fn field_rotation<T: FieldRotation>(state: &T, phi: f64) -> T {
    state.field_rotation(phi)
}

pub fn run_protocol(spec: &ProtocolSpec) -> Result<ProtocolTrace> {
    spec.validate()?;
    match spec.engine {
        Engine::Exact => run_exact(spec),
        Engine::Collective => run_collective(spec),
    }
}

fn initial_ground(spec: &ProtocolSpec) -> Result<GroundStateVector> {
    match &spec.initial {
        InitialState::Dark => dark_state(spec.params.n_at),
        InitialState::Custom { amplitudes } => {
            GroundStateVector::from_vec(spec.params.n_at, amplitudes.clone())?.normalized()
        }
    }
}

fn row(
    n_v: usize,
    r_vh: f64,
    r_vv: f64,
    loss: f64,
    n_tot_h: f64,
    spin: SpinObservables,
) -> TraceRow {
    TraceRow {
        n_v,
        r_vh,
        r_vv,
        loss,
        n_tot_h,
        sx: spin.sx,
        sy: spin.sy,
        sz: spin.sz,
    }
}

fn run_exact(spec: &ProtocolSpec) -> Result<ProtocolTrace> {
    let phi = spec.field_phase;
    let mut rho = GroundDensityMatrix::from_pure(&initial_ground(spec)?)?;
    let mut events = 0usize;
    let mut prelude = Vec::with_capacity(spec.prelude.len());
    for ev in &spec.prelude {
        if events > 0 {
            rho = rho.field_rotation(phi);
        }
        events += 1;
        let params = spec
            .params
            .with_omega(ev.omega.unwrap_or(spec.params.omega));
        let channel = KrausChannel::new(&params, ev.pol, MeasurementBasis::of(ev.pol))?;
        let (next, record) = match ev.outcome {
            PreludeOutcome::Heralded(out) => {
                let kept = channel.branch(&rho, out)?;
                let p = kept.trace() / rho.trace();
                let loss = (1.0 - channel.step(&rho, LossPolicy::Discard)?.1.reflected()).max(0.0);
                if !(p > 0.0) {
                    return Err(ZenoError::DegenerateState(format!(
                        "heralded {out} branch has zero probability"
                    )));
                }
                (kept.normalized()?, (p, loss))
            }
            PreludeOutcome::Unconditioned => {
                let (next, rec) = channel.step(&rho, LossPolicy::Discard)?;
                (next, (rec.reflected(), rec.loss))
            }
        };
        rho = next;
        prelude.push(PreludeRecord {
            pol: ev.pol,
            outcome: ev.outcome,
            probability: record.0,
            loss: record.1,
        });
    }

    let mut rows = Vec::with_capacity(spec.n_v + 1);
    rows.push(row(0, 0.0, 0.0, 0.0, 0.0, spin_expectations_density(&rho)?));
    let channel = match spec.drive {
        DriveMode::Photons if spec.n_v > 0 => Some(KrausChannel::from_workspace(
            &build_h1(&spec.params)?,
            PolarizationLabel::V,
            MeasurementBasis::Linear,
        )?),
        _ => None,
    };
    let mut n_tot = 0.0;
    for j in 1..=spec.n_v {
        if events > 0 {
            rho = rho.field_rotation(phi);
        }
        let (r_vh, r_vv, loss) = match &channel {
            Some(ch) => {
                events += 1;
                let (next, rec) = ch.step(&rho, spec.loss_policy)?;
                rho = next;
                (
                    rec.probability(PolarizationLabel::H),
                    rec.probability(PolarizationLabel::V),
                    rec.loss,
                )
            }
            None => {
                events += 1;
                (0.0, 0.0, 0.0)
            }
        };
        n_tot += r_vh;
        rows.push(row(
            j,
            r_vh,
            r_vv,
            loss,
            n_tot,
            spin_expectations_density(&rho)?,
        ));
    }
    Ok(ProtocolTrace { prelude, rows })
}

fn run_collective(spec: &ProtocolSpec) -> Result<ProtocolTrace> {
    let n = spec.params.n_at;
    let mut prelude = Vec::new();
    let mut rho = ReducedDensityMatrix::dark(n)?;
    if let Some(ev) = spec.prelude.first() {
        let params = spec
            .params
            .with_omega(ev.omega.unwrap_or(spec.params.omega));
        let [stay, flip] = circular_kick_branches(&params);
        let p_stay = stay[0].norm_sqr() + stay[1].norm_sqr();
        let p_flip = first_photon_state(&params).probability;
        let loss = (1.0 - p_stay - p_flip).max(0.0);
        let (next, probability) = match ev.outcome {
            PreludeOutcome::Heralded(PolarizationLabel::Minus) => {
                (first_photon_state(&params).density(n), p_flip)
            }
            PreludeOutcome::Heralded(_) => (
                ReducedDensityMatrix::from_amplitudes(n, stay[0], stay[1])?,
                p_stay,
            ),
            PreludeOutcome::Unconditioned => {
                let outer = |v: [C64; 2], i: usize, k: usize| v[i] * v[k].conj();
                let mut m = [[C64::new(0.0, 0.0); 2]; 2];
                for (i, r) in m.iter_mut().enumerate() {
                    for (k, cell) in r.iter_mut().enumerate() {
                        *cell = outer(stay, i, k) + outer(flip, i, k);
                    }
                }
                let kept = p_stay + p_flip;
                match spec.loss_policy {
                    LossPolicy::Discard => {
                        for r in m.iter_mut() {
                            for cell in r.iter_mut() {
                                *cell /= kept;
                            }
                        }
                    }
                    LossPolicy::PaperReduced => m[0][0] += loss,
                }
                (ReducedDensityMatrix::new(n, m)?, kept)
            }
        };
        rho = next;
        prelude.push(PreludeRecord {
            pol: ev.pol,
            outcome: ev.outcome,
            probability,
            loss,
        });
    }

    let scalars = polarizability(&spec.params);
    let mut rows = Vec::with_capacity(spec.n_v + 1);
    rows.push(row(0, 0.0, 0.0, 0.0, 0.0, rho.spin()));
    let mut n_tot = 0.0;
    for j in 1..=spec.n_v {
        let (r_vh, r_vv, loss) = match spec.drive {
            DriveMode::Photons => {
                let (next, step) = reduced_step_with(&rho, &scalars, spec.loss_policy);
                rho = next;
                (step.r_vh, step.r_vv, step.loss)
            }
            DriveMode::FreeRotation => (0.0, 0.0, 0.0),
        };
        n_tot += r_vh;
        rows.push(row(j, r_vh, r_vv, loss, n_tot, rho.spin()));
    }
    Ok(ProtocolTrace { prelude, rows })
}

/// First index `j` with `|v_k − v_j| < rel_tol·|v_j|` for every `k` in
/// `j..=j+window`, or `None` if the series never settles.
pub fn detect_plateau(values: &[f64], window: usize, rel_tol: f64) -> Option<usize> {
    if values.len() <= window {
        return None;
    }
    (0..values.len() - window).find(|&j| {
        let base = values[j];
        base != 0.0
            && values[j..=j + window]
                .iter()
                .all(|v| (v - base).abs() < rel_tol * base.abs())
    })
}

/// Evaluates `f` on every grid point in parallel. Results keep grid order and
/// a failing point does not stop the others.
pub fn sweep<T, R, F>(grid: &[T], f: F) -> Vec<Result<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    grid.par_iter().map(&f).collect()
}

/// [`sweep`] over protocol specs.
pub fn sweep_protocols(grid: &[ProtocolSpec]) -> Vec<Result<ProtocolTrace>> {
    sweep(grid, run_protocol)
}
