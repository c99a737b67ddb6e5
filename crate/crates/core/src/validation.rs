//! Self-checks run by `validate`.
//!
//! Each suite compares an engine against an independent reference and
//! reports the worst deviation next to its tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collective::{n_tot_h_closed_form, polarizability, s_z_series, Horizon};
use crate::error::{Result, ZenoError};
use crate::exact::{build_h1, scatter_in, KrausChannel, SingleExcitedWorkspace};
use crate::model::{
    apply_collective_spin, dark_state, pair_operator, spin_expectations, GroundStateVector,
    MeasurementBasis, PolarizationLabel, SpinAxis, C64,
};
use crate::oracles::{
    airy_reflection, n1_amplitudes, n2_amplitudes, polarized_lambda_reflection,
    two_level_reflection, AirySystem,
};
use crate::params::PhysicalParams;
use crate::protocol::{detect_plateau, run_protocol, DriveMode, ProtocolSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    SelectionRules,
    Unitarity,
    Oracles,
    Airy,
    Kick,
    ClosedForm,
    Field,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::SelectionRules,
        Suite::Unitarity,
        Suite::Oracles,
        Suite::Airy,
        Suite::Kick,
        Suite::ClosedForm,
        Suite::Field,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::SelectionRules => "selection-rules",
            Suite::Unitarity => "unitarity",
            Suite::Oracles => "oracles",
            Suite::Airy => "airy",
            Suite::Kick => "kick",
            Suite::ClosedForm => "closed-form",
            Suite::Field => "field",
        }
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Suite {
    type Err = ZenoError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| ZenoError::InvalidParameter(format!("unknown suite '{s}'")))
    }
}

/// Deliberate defects for checking that the suites catch them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Flip the sign of the radiative damping term in `H₁`.
    FlipDissipation,
}

impl std::str::FromStr for Fault {
    type Err = ZenoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flip-dissipation" => Ok(Fault::FlipDissipation),
            other => Err(ZenoError::InvalidParameter(format!(
                "unknown fault '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateOptions {
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            suites: Suite::ALL.to_vec(),
            seed: 20240917,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: impl Into<String>, max_error: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            max_error,
            tolerance,
            // NaN counts as a failure
            passed: max_error <= tolerance,
        }
    }

    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    fn failed(name: impl Into<String>, err: &ZenoError) -> Self {
        let mut c = Self::new(format!("{} ({err})", name.into()), f64::NAN, 0.0);
        c.passed = false;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub fault: Option<Fault>,
    pub suites: Vec<SuiteReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.suites
            .iter()
            .flat_map(|s| {
                s.checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(move |c| format!("{}: {}", s.suite, c.name))
            })
            .collect()
    }
}

pub fn run_validation(opts: &ValidateOptions) -> ValidationReport {
    let suites = opts
        .suites
        .iter()
        .map(|&suite| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let ctx = Ctx { fault: opts.fault };
            let checks = match suite {
                Suite::SelectionRules => selection_rules(&mut rng),
                Suite::Unitarity => unitarity(&ctx, &mut rng),
                Suite::Oracles => oracle_suite(&ctx, &mut rng),
                Suite::Airy => airy_suite(&ctx, &mut rng),
                Suite::Kick => kick_suite(&ctx),
                Suite::ClosedForm => closed_form_suite(),
                Suite::Field => field_suite(),
            };
            SuiteReport { suite, checks }
        })
        .collect();
    ValidationReport {
        seed: opts.seed,
        fault: opts.fault,
        suites,
    }
}

struct Ctx {
    fault: Option<Fault>,
}

impl Ctx {
    fn workspace(&self, params: &PhysicalParams) -> Result<SingleExcitedWorkspace> {
        let ws = build_h1(params)?;
        Ok(match self.fault {
            Some(Fault::FlipDissipation) => ws.with_flipped_dissipation(),
            None => ws,
        })
    }
}

/// Normalized state with independent uniform real and imaginary parts.
pub fn random_ground_state<R: Rng>(rng: &mut R, n_at: usize) -> GroundStateVector {
    let amps = (0..1usize << n_at)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    GroundStateVector::from_vec(n_at, amps)
        .and_then(|s| s.normalized())
        .expect("random state is nonzero")
}

fn max_abs_diff(a: &GroundStateVector, b: &GroundStateVector) -> f64 {
    (a.amplitudes() - b.amplitudes()).amax_by_norm()
}

trait AmaxNorm {
    fn amax_by_norm(&self) -> f64;
}

impl AmaxNorm for nalgebra::DVector<C64> {
    fn amax_by_norm(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn selection_rules(rng: &mut ChaCha8Rng) -> Vec<CheckResult> {
    use PolarizationLabel::{Minus, Plus, H, V};
    // Σ_j σ_out σ_in† in terms of the collective spin; `half` is the N/2 shift
    type Rule = (PolarizationLabel, PolarizationLabel, f64, [C64; 3]);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    let rules: [Rule; 8] = [
        (Plus, Plus, 1.0, [z, z, -one]),
        (Minus, Minus, 1.0, [z, z, one]),
        (Minus, Plus, 0.0, [one, i, z]),
        (Plus, Minus, 0.0, [one, -i, z]),
        (H, H, 1.0, [one, z, z]),
        (V, V, 1.0, [-one, z, z]),
        (H, V, 0.0, [z, i, -one]),
        (V, H, 0.0, [z, -i, -one]),
    ];
    let mut checks = Vec::new();
    for (out, inp, half, coeffs) in rules {
        let mut worst: f64 = 0.0;
        for n in 1..=5 {
            for _ in 0..10 {
                let psi = random_ground_state(rng, n);
                let lhs = match pair_operator(&psi, out, inp) {
                    Ok(v) => v,
                    Err(e) => return vec![CheckResult::failed("pair operator", &e)],
                };
                let mut rhs = psi.amplitudes() * C64::new(half * n as f64 / 2.0, 0.0);
                for (c, axis) in coeffs.iter().zip([SpinAxis::X, SpinAxis::Y, SpinAxis::Z]) {
                    if *c != z {
                        rhs += apply_collective_spin(&psi, axis).amplitudes() * *c;
                    }
                }
                worst = worst.max((lhs.amplitudes() - rhs).amax_by_norm());
            }
        }
        checks.push(CheckResult::new(
            format!("sigma_{out} sigma_{inp}^dag"),
            worst,
            1e-12,
        ));
    }
    checks
}

fn unitarity(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    for n in 1..=6 {
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let omega = rng.gen_range(-3.0..3.0);
            let params = PhysicalParams::new(0.0, omega, 1.0, 0.0, n).expect("valid");
            let ws = match ctx.workspace(&params) {
                Ok(ws) => ws,
                Err(e) => return vec![CheckResult::failed(format!("n_at={n}"), &e)],
            };
            for basis in [MeasurementBasis::Circular, MeasurementBasis::Linear] {
                for in_pol in basis.labels() {
                    let ch = match KrausChannel::from_workspace(&ws, in_pol, basis) {
                        Ok(ch) => ch,
                        Err(e) => return vec![CheckResult::failed(format!("n_at={n}"), &e)],
                    };
                    for _ in 0..20 {
                        let psi = random_ground_state(rng, n);
                        let total: f64 = basis
                            .labels()
                            .iter()
                            .map(|&o| ch.apply_pure(&psi, o).map_or(f64::NAN, |v| v.norm_sqr()))
                            .sum();
                        worst = worst.max((total - 1.0).abs());
                    }
                }
            }
        }
        checks.push(CheckResult::new(
            format!("probability sum, n_at={n}"),
            worst,
            1e-10,
        ));
    }
    checks
}

fn oracle_suite(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    for n in [1usize, 2] {
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let omega = rng.gen_range(-4.0..4.0);
            let gamma = rng.gen_range(0.0..2.0);
            let params = PhysicalParams::new(0.0, omega, 1.0, gamma, n).expect("valid");
            let oracle = if n == 1 {
                n1_amplitudes(&params)
            } else {
                n2_amplitudes(&params)
            };
            let got = ctx.workspace(&params).and_then(|ws| {
                scatter_in(
                    &ws,
                    &dark_state(n)?,
                    PolarizationLabel::Plus,
                    MeasurementBasis::Circular,
                )
            });
            let (oracle, got) = match (oracle, got) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    return vec![CheckResult::failed(format!("n_at={n}"), &e)]
                }
            };
            for (label, want) in [
                (PolarizationLabel::Plus, &oracle.no_flip),
                (PolarizationLabel::Minus, &oracle.flip),
            ] {
                let want = GroundStateVector::from_vec(n, want.clone()).expect("dimension");
                let have = &got.branch(label).expect("circular basis").state;
                worst = worst.max(max_abs_diff(&want, have));
            }
        }
        checks.push(CheckResult::new(
            format!("amplitudes, n_at={n}"),
            worst,
            1e-10,
        ));
    }
    checks
}

fn airy_suite(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Vec<CheckResult> {
    let mut chain: f64 = 0.0;
    let mut unimodular: f64 = 0.0;
    for _ in 0..100 {
        let omega = rng.gen_range(-5.0..5.0);
        let rho = rng.gen_range(0.0..0.95);
        let n = rng.gen_range(1..=10);
        let sys = AirySystem::new(0.0, 1.0, rho).expect("valid mirror");
        let r = match airy_reflection(omega, &sys, n) {
            Ok(r) => r,
            Err(e) => return vec![CheckResult::failed("chained reflection", &e)],
        };
        let g = two_level_reflection(omega, 0.0, sys.effective_gamma1d(), n);
        chain = chain.max((r - g).norm());
        unimodular = unimodular.max((r.norm() - 1.0).abs());
    }
    let mut lambda: f64 = 0.0;
    for n in 1..=5 {
        let omega = rng.gen_range(-3.0..3.0);
        let params = PhysicalParams::new(0.0, omega, 1.0, 0.0, n).expect("valid");
        let res = ctx.workspace(&params).and_then(|ws| {
            let all_plus = GroundStateVector::basis_state(n, 0)?;
            let out = scatter_in(
                &ws,
                &all_plus,
                PolarizationLabel::Plus,
                MeasurementBasis::Circular,
            )?;
            Ok((out, polarized_lambda_reflection(&params)?))
        });
        match res {
            Ok((out, want)) => {
                let have = out
                    .branch(PolarizationLabel::Plus)
                    .expect("circular")
                    .state
                    .amplitudes()[0];
                lambda = lambda.max((have - want).norm());
            }
            Err(e) => return vec![CheckResult::failed("polarized ensemble", &e)],
        }
    }
    vec![
        CheckResult::new("multiple reflections vs Green function", chain, 1e-12),
        CheckResult::new("|r| = 1 without loss", unimodular, 1e-12),
        CheckResult::new("polarized Lambda ensemble reflection", lambda, 1e-10),
    ]
}

fn kick_suite(ctx: &Ctx) -> Vec<CheckResult> {
    let mut spin_err: f64 = 0.0;
    let mut r1_err: f64 = 0.0;
    let mut rvh_err: f64 = 0.0;
    for n in 1..=8 {
        let nn = n as f64;
        let params = PhysicalParams::resonant(n).expect("valid");
        let res = ctx.workspace(&params).and_then(|ws| {
            let out = scatter_in(
                &ws,
                &dark_state(n)?,
                PolarizationLabel::Plus,
                MeasurementBasis::Circular,
            )?;
            let flip = out
                .branch(PolarizationLabel::Minus)
                .expect("circular")
                .clone();
            let kicked = flip.state.normalized()?;
            let v = scatter_in(&ws, &kicked, PolarizationLabel::V, MeasurementBasis::Linear)?;
            Ok((
                flip.probability,
                spin_expectations(&kicked)?,
                v.probability(PolarizationLabel::H),
            ))
        });
        let (r1, s, rvh) = match res {
            Ok(x) => x,
            Err(e) => return vec![CheckResult::failed(format!("n_at={n}"), &e)],
        };
        spin_err = spin_err
            .max((s.sz - nn / (nn + 1.0)).abs())
            .max((s.sx - (nn / 2.0 - 1.0 / (nn + 1.0))).abs())
            .max(s.sy.abs());
        r1_err = r1_err.max((r1 - nn / (nn + 1.0)).abs());
        let alpha2 = polarizability(&params).alpha.norm_sqr();
        rvh_err = rvh_err.max((rvh - alpha2 * nn / (nn + 1.0)).abs());
    }
    vec![
        CheckResult::new("kicked spin expectations", spin_err, 1e-12),
        CheckResult::new("flip probability N/(N+1)", r1_err, 1e-12),
        CheckResult::new("first V->H reflection |alpha|^2 N/(N+1)", rvh_err, 1e-12),
    ]
}

fn closed_form_suite() -> Vec<CheckResult> {
    let mut sz_err: f64 = 0.0;
    let mut ntot_err: f64 = 0.0;
    let n_v = 40;
    for n in 1..=4 {
        let params = PhysicalParams::resonant(n).expect("valid");
        let trace = match run_protocol(&ProtocolSpec::kicked(params, n_v)) {
            Ok(t) => t,
            Err(e) => return vec![CheckResult::failed(format!("n_at={n}"), &e)],
        };
        let nn = n as f64;
        let series = s_z_series(n_v, nn / (nn + 1.0), &polarizability(&params));
        for (row, sz) in trace.rows.iter().zip(series) {
            sz_err = sz_err.max((row.sz - sz).abs());
            let want = n_tot_h_closed_form(Horizon::Photons(row.n_v as u64), &params);
            ntot_err = ntot_err.max((row.n_tot_h - want).abs());
        }
    }
    vec![
        CheckResult::new("S_z(N_V) = S_z(0) Re chi^N_V", sz_err, 1e-10),
        CheckResult::new("cumulative H photons", ntot_err, 1e-10),
    ]
}

/// Field-on and field-off runs used by the field suite and acceptance tests.
pub fn field_trace(phi: f64, n_v: usize) -> Result<crate::protocol::ProtocolTrace> {
    let params = PhysicalParams::with_collective_cooperativity(4, 5.0, 0.0, 0.0)?;
    run_protocol(&ProtocolSpec::kicked(params, n_v).with_field_phase(phi))
}

fn field_suite() -> Vec<CheckResult> {
    let mut checks = Vec::new();
    let params = PhysicalParams::with_collective_cooperativity(4, 5.0, 0.0, 0.0).expect("valid");
    let mut free = ProtocolSpec::kicked(params, 100).with_field_phase(0.25);
    free.drive = DriveMode::FreeRotation;
    match run_protocol(&free) {
        Ok(t) => {
            let l0 = t.rows[0].sx.powi(2) + t.rows[0].sz.powi(2);
            let worst = t
                .rows
                .iter()
                .map(|r| (r.sx.powi(2) + r.sz.powi(2) - l0).abs())
                .fold(0.0, f64::max);
            checks.push(CheckResult::new(
                "free precession keeps Sx^2+Sz^2",
                worst,
                1e-12,
            ));
        }
        Err(e) => checks.push(CheckResult::failed("free precession", &e)),
    }
    match (field_trace(0.18, 200), field_trace(0.0, 200)) {
        (Ok(on), Ok(off)) => {
            let sz: Vec<f64> = on.rows.iter().map(|r| r.sz).collect();
            let plateau = detect_plateau(&sz, 20, 1e-4);
            checks.push(CheckResult::flag(
                "field on: Sz plateau is nonzero",
                plateau.is_some_and(|j| sz[j].abs() > 1e-3),
            ));
            let last = on.last().r_vh;
            let earlier = on.rows[on.rows.len() - 21].r_vh;
            checks.push(CheckResult::flag(
                "field on: R_VH settles at a positive value",
                last > 1e-3 && (last - earlier).abs() < 1e-4 * last,
            ));
            let tail = off.last().n_tot_h - off.rows[off.rows.len() - 21].n_tot_h;
            checks.push(CheckResult::flag(
                "field off: cumulative H photons saturate",
                off.last().r_vh < 1e-10 && tail < 1e-10,
            ));
        }
        (Err(e), _) | (_, Err(e)) => checks.push(CheckResult::failed("field runs", &e)),
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        let report = run_validation(&ValidateOptions::default());
        assert!(report.passed(), "{:?}", report.failures());
    }

    #[test]
    fn flipped_dissipation_fails_unitarity() {
        let report = run_validation(&ValidateOptions {
            suites: vec![Suite::Unitarity],
            fault: Some(Fault::FlipDissipation),
            ..Default::default()
        });
        assert!(!report.passed());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }
}
