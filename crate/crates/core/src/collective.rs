//! Two-state collective description.
//!
//! After the ensemble has been prepared in the dark state and kicked by one
//! circular photon, its state lives in the span of
//! `e₁ = |S_x = N/2⟩` and `e₂ = |S_x = N/2 − 1⟩`, with `e₂` fixed by
//! `S_z e₁ = (√N/2) e₂`. A `V` photon acts there as
//! `K_{V→V} = diag(1, χ)` and `K_{V→H} = α√N |e₁⟩⟨e₂|` (up to a phase),
//! with the polarizability
//!
//! ```text
//! α(ω) = −γ_1D / (ω − ω₀ + iγ_1D(N+1)/2 + iγ),   χ = 1 + iα.
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::exact::LossPolicy;
use crate::model::{SpinObservables, C64};
use crate::params::PhysicalParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectiveScalars {
    pub n_at: usize,
    pub alpha: C64,
    pub chi: C64,
}

pub fn polarizability(params: &PhysicalParams) -> CollectiveScalars {
    let n = params.n_at as f64;
    let denom = C64::new(
        params.omega - params.omega0,
        params.gamma1d * (n + 1.0) / 2.0 + params.gamma,
    );
    let alpha = C64::new(-params.gamma1d, 0.0) / denom;
    CollectiveScalars {
        n_at: params.n_at,
        alpha,
        chi: C64::new(1.0, 0.0) + C64::new(0.0, 1.0) * alpha,
    }
}

impl CollectiveScalars {
    /// `N|α|²`: probability that a `V` photon leaves as `H` from `e₂`.
    pub fn flip_rate(&self) -> f64 {
        self.n_at as f64 * self.alpha.norm_sqr()
    }
}

/// 2×2 density matrix over `{e₁, e₂}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedDensityMatrix {
    n_at: usize,
    m: [[C64; 2]; 2],
}

impl ReducedDensityMatrix {
    const TOLERANCE: f64 = 1e-10;

    pub fn new(n_at: usize, m: [[C64; 2]; 2]) -> Result<Self> {
        if n_at < 1 {
            return Err(ZenoError::InvalidParameter(
                "n_at must be at least 1".into(),
            ));
        }
        let herm = (m[0][1] - m[1][0].conj()).norm() + m[0][0].im.abs() + m[1][1].im.abs();
        if herm > Self::TOLERANCE {
            return Err(ZenoError::InvalidState(
                "reduced density matrix is not Hermitian".into(),
            ));
        }
        let tr = m[0][0].re + m[1][1].re;
        if (tr - 1.0).abs() > Self::TOLERANCE {
            return Err(ZenoError::InvalidState(format!(
                "reduced trace is {tr}, expected 1"
            )));
        }
        let det = m[0][0].re * m[1][1].re - m[0][1].norm_sqr();
        if m[0][0].re < -Self::TOLERANCE || m[1][1].re < -Self::TOLERANCE || det < -Self::TOLERANCE
        {
            return Err(ZenoError::InvalidState(
                "reduced density matrix is not positive".into(),
            ));
        }
        Ok(Self { n_at, m })
    }

    /// Pure state `a e₁ + b e₂`, normalized.
    pub fn from_amplitudes(n_at: usize, a: C64, b: C64) -> Result<Self> {
        let norm = a.norm_sqr() + b.norm_sqr();
        if !(norm > 0.0) {
            return Err(ZenoError::InvalidState("zero reduced state".into()));
        }
        let (a, b) = (a / norm.sqrt(), b / norm.sqrt());
        Self::new(
            n_at,
            [[a * a.conj(), a * b.conj()], [b * a.conj(), b * b.conj()]],
        )
    }

    pub fn dark(n_at: usize) -> Result<Self> {
        Self::from_amplitudes(n_at, C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    pub fn n_at(&self) -> usize {
        self.n_at
    }

    pub fn entries(&self) -> [[C64; 2]; 2] {
        self.m
    }

    pub fn rho11(&self) -> f64 {
        self.m[0][0].re
    }

    pub fn rho22(&self) -> f64 {
        self.m[1][1].re
    }

    pub fn rho12(&self) -> C64 {
        self.m[0][1]
    }

    /// `S_x = diag(N/2, N/2 − 1)`, `S_z = (√N/2)σ_x`, `S_y = (√N/2)(−σ_y)`.
    pub fn spin(&self) -> SpinObservables {
        let n = self.n_at as f64;
        let r = n.sqrt();
        SpinObservables {
            sx: n / 2.0 * self.rho11() + (n / 2.0 - 1.0) * self.rho22(),
            sy: r * self.rho12().im,
            sz: r * self.rho12().re,
        }
    }
}

/// Normalized flip-branch state after one `σ₊` photon together with the
/// flip probability `R₁ = |α|² N(N+1)/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstPhoton {
    /// Coefficients on `(e₁, e₂)`: `(√(N/(N+1)), √(1/(N+1)))`.
    pub amplitudes: [f64; 2],
    pub probability: f64,
}

pub fn first_photon_state(params: &PhysicalParams) -> FirstPhoton {
    let n = params.n_at as f64;
    let s = polarizability(params);
    FirstPhoton {
        amplitudes: [(n / (n + 1.0)).sqrt(), (1.0 / (n + 1.0)).sqrt()],
        probability: s.alpha.norm_sqr() * n * (n + 1.0) / 4.0,
    }
}

impl FirstPhoton {
    pub fn density(&self, n_at: usize) -> ReducedDensityMatrix {
        let [a, b] = self.amplitudes;
        ReducedDensityMatrix::from_amplitudes(n_at, C64::new(a, 0.0), C64::new(b, 0.0))
            .expect("normalized by construction")
    }
}

/// Both branches of a `σ₊` photon on the dark state, unnormalized:
/// `ψ_{+→+} = (1 + iαN/2)e₁ − iα(√N/2)e₂`, `ψ_{+→−} = (iα/2)(N e₁ + √N e₂)`.
pub fn circular_kick_branches(params: &PhysicalParams) -> [[C64; 2]; 2] {
    let n = params.n_at as f64;
    let ia = C64::new(0.0, 1.0) * polarizability(params).alpha;
    [
        [C64::new(1.0, 0.0) + ia * (n / 2.0), -ia * (n.sqrt() / 2.0)],
        [ia * (n / 2.0), ia * (n.sqrt() / 2.0)],
    ]
}

/// Outcome of one `V` photon in the reduced model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedStep {
    pub r_vh: f64,
    pub r_vv: f64,
    pub loss: f64,
}

/// One `V` photon with the lost population returned to `e₁`:
/// `ρ₁₁' = 1 − |χ|²ρ₂₂`, `ρ₁₂' = χ*ρ₁₂`, `ρ₂₂' = |χ|²ρ₂₂`.
pub fn reduced_step(
    rho: &ReducedDensityMatrix,
    scalars: &CollectiveScalars,
) -> (ReducedDensityMatrix, ReducedStep) {
    reduced_step_with(rho, scalars, LossPolicy::PaperReduced)
}

/// Like [`reduced_step`], with a choice of what happens to lost photons.
/// `Discard` renormalizes over the reflected branches instead.
pub fn reduced_step_with(
    rho: &ReducedDensityMatrix,
    scalars: &CollectiveScalars,
    policy: LossPolicy,
) -> (ReducedDensityMatrix, ReducedStep) {
    let chi2 = scalars.chi.norm_sqr();
    let rho22 = rho.rho22();
    let r_vh = scalars.flip_rate() * rho22;
    let r_vv = rho.rho11() + chi2 * rho22;
    let loss = (1.0 - r_vh - r_vv).max(0.0);
    let off = rho.rho12() * scalars.chi.conj();
    let m = match policy {
        LossPolicy::PaperReduced => {
            let p22 = chi2 * rho22;
            [
                [C64::new(1.0 - p22, 0.0), off],
                [off.conj(), C64::new(p22, 0.0)],
            ]
        }
        LossPolicy::Discard => {
            let kept = r_vh + r_vv;
            [
                [C64::new((rho.rho11() + r_vh) / kept, 0.0), off / kept],
                [off.conj() / kept, C64::new(chi2 * rho22 / kept, 0.0)],
            ]
        }
    };
    (
        ReducedDensityMatrix { n_at: rho.n_at, m },
        ReducedStep { r_vh, r_vv, loss },
    )
}

/// Number of `V` photons in a sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Horizon {
    Photons(u64),
    Infinite,
}

/// `N_tot^H(∞) = N|α|² / ((N+1)(1 − |χ|²))`, valid at any detuning.
pub fn n_tot_h_saturation(params: &PhysicalParams) -> f64 {
    let s = polarizability(params);
    let n = params.n_at as f64;
    s.flip_rate() / ((n + 1.0) * (1.0 - s.chi.norm_sqr()))
}

/// `N_tot^H(N_V) = N_tot^H(∞)(1 − |χ|^{2N_V})` for a `σ₊` flip followed by
/// `N_V` photons of `V` polarization, with lost photons counted as dark.
pub fn n_tot_h_closed_form(horizon: Horizon, params: &PhysicalParams) -> f64 {
    let sat = n_tot_h_saturation(params);
    match horizon {
        Horizon::Infinite => sat,
        Horizon::Photons(0) => 0.0,
        Horizon::Photons(k) => {
            let chi2 = polarizability(params).chi.norm_sqr();
            sat * (1.0 - chi2.powf(k as f64))
        }
    }
}

/// Resonant saturation in terms of the collective cooperativity:
/// `(1/(N+1)) · N C / (N C + N + 1)`. `c_n = inf` gives `1/(N+1)`.
pub fn saturation_from_cooperativity(n_at: usize, c_n: f64) -> f64 {
    let n = n_at as f64;
    if c_n.is_infinite() {
        return 1.0 / (n + 1.0);
    }
    n * c_n / ((n + 1.0) * (n * c_n + n + 1.0))
}

/// `S_z(0)·Re χ^k` for `k = 0..=n_v_max`.
pub fn s_z_series(n_v_max: usize, s_z0: f64, scalars: &CollectiveScalars) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_v_max + 1);
    let mut power = C64::new(1.0, 0.0);
    for _ in 0..=n_v_max {
        out.push(s_z0 * power.re);
        power *= scalars.chi;
    }
    out
}

/// Smallest `N_V` with `N_tot^H(N_V) ≥ fraction · N_tot^H(∞)`.
pub fn photons_to_fraction(params: &PhysicalParams, fraction: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(ZenoError::InvalidParameter(format!(
            "fraction must lie in [0, 1), got {fraction}"
        )));
    }
    let chi2 = polarizability(params).chi.norm_sqr();
    if chi2 == 0.0 || fraction == 0.0 {
        return Ok(if fraction == 0.0 { 0 } else { 1 });
    }
    // 1 − |χ|^{2k} ≥ f  ⇔  k ≥ ln(1 − f)/ln|χ|²
    let k = ((1.0 - fraction).ln() / chi2.ln()).ceil().max(1.0) as u64;
    // guard against rounding at the boundary
    let reached = |k: u64| 1.0 - chi2.powf(k as f64) >= fraction;
    let k = if k > 1 && reached(k - 1) { k - 1 } else { k };
    Ok(if reached(k) { k } else { k + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resonant(n: usize) -> PhysicalParams {
        PhysicalParams::resonant(n).unwrap()
    }

    #[test]
    fn polarizability_examples() {
        let s1 = polarizability(&resonant(1));
        assert!((s1.alpha - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(s1.chi.norm() < 1e-15);
        let s3 = polarizability(&resonant(3));
        assert!((s3.alpha - C64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((s3.chi - C64::new(0.5, 0.0)).norm() < 1e-15);
        for n in 1..=40 {
            let s = polarizability(&resonant(n));
            let expect = (n as f64 - 1.0) / (n as f64 + 1.0);
            assert!((s.chi - C64::new(expect, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn first_photon_examples() {
        for n in 1..=20 {
            let f = first_photon_state(&resonant(n));
            let nn = n as f64;
            assert!((f.probability - nn / (nn + 1.0)).abs() < 1e-14);
        }
        assert!((first_photon_state(&resonant(1)).probability - 0.5).abs() < 1e-15);
        let f4 = first_photon_state(&resonant(4));
        assert!((f4.amplitudes[0] - 0.8f64.sqrt()).abs() < 1e-15);
        assert!((f4.amplitudes[1] - 0.2f64.sqrt()).abs() < 1e-15);
        let rho = f4.density(4);
        assert!((rho.rho12().re - 2.0 / 5.0).abs() < 1e-15);
        assert!((rho.spin().sz - 0.8).abs() < 1e-14);
    }

    #[test]
    fn kick_branches_normalize_to_first_photon() {
        for n in 1..=9 {
            let p = PhysicalParams::new(0.0, 0.3, 1.0, 0.1, n).unwrap();
            let [_, flip] = circular_kick_branches(&p);
            let norm = flip[0].norm_sqr() + flip[1].norm_sqr();
            let f = first_photon_state(&p);
            assert!((norm - f.probability).abs() < 1e-14);
            let phase = flip[0] / flip[0].norm();
            assert!(
                (flip[0] / phase / norm.sqrt() - C64::new(f.amplitudes[0], 0.0)).norm() < 1e-14
            );
            assert!(
                (flip[1] / phase / norm.sqrt() - C64::new(f.amplitudes[1], 0.0)).norm() < 1e-14
            );
        }
    }

    #[test]
    fn single_atom_step_empties_upper_level() {
        let s = polarizability(&resonant(1));
        let rho = first_photon_state(&resonant(1)).density(1);
        let (next, step) = reduced_step(&rho, &s);
        assert!(next.rho22().abs() < 1e-15);
        assert!((step.r_vh - 0.5).abs() < 1e-15);
    }

    #[test]
    fn upper_population_decays_geometrically() {
        let p = PhysicalParams::new(0.0, 0.4, 1.0, 0.3, 5).unwrap();
        let s = polarizability(&p);
        let mut rho = first_photon_state(&p).density(5);
        let r0 = rho.rho22();
        for k in 1..=20 {
            rho = reduced_step(&rho, &s).0;
            assert!((rho.rho22() - r0 * s.chi.norm_sqr().powi(k)).abs() < 1e-14);
        }
    }

    #[test]
    fn sz_follows_chi_powers() {
        let p = PhysicalParams::new(0.0, 0.8, 1.0, 0.2, 4).unwrap();
        let s = polarizability(&p);
        let mut rho = first_photon_state(&p).density(4);
        let series = s_z_series(30, rho.spin().sz, &s);
        for expect in series.iter().skip(1) {
            rho = reduced_step(&rho, &s).0;
            assert!((rho.spin().sz - expect).abs() < 1e-13);
        }
        assert!((series[0] - 0.8).abs() < 1e-14);
    }

    #[test]
    fn closed_form_examples() {
        assert!((n_tot_h_closed_form(Horizon::Infinite, &resonant(1)) - 0.5).abs() < 1e-15);
        let p = PhysicalParams::with_collective_cooperativity(1, 5.0, 0.0, 0.0).unwrap();
        assert!((n_tot_h_closed_form(Horizon::Infinite, &p) - 5.0 / 14.0).abs() < 1e-14);
        assert_eq!(n_tot_h_closed_form(Horizon::Photons(0), &p), 0.0);
        for n in 1..=30 {
            assert!(
                (n_tot_h_closed_form(Horizon::Infinite, &resonant(n)) - 1.0 / (n as f64 + 1.0))
                    .abs()
                    < 1e-14
            );
        }
    }

    #[test]
    fn saturation_forms_agree_on_resonance() {
        for n in 1..=16 {
            for c in [1.0, 5.0, 20.0, f64::INFINITY] {
                let p = PhysicalParams::with_collective_cooperativity(n, c, 0.0, 0.0).unwrap();
                let a = n_tot_h_saturation(&p);
                let b = saturation_from_cooperativity(n, c);
                assert!((a - b).abs() < 1e-14, "n={n} c={c}");
            }
        }
    }

    #[test]
    fn cumulative_form_of_the_per_step_expression() {
        // (1/(N+1))·N/(N+2γ)·[1 − |χ|^{2(k−1)}] with γ in units of γ_1D is N_tot^H(k−1)
        for n in [1usize, 2, 4, 8] {
            let p = PhysicalParams::with_collective_cooperativity(n, 5.0, 0.0, 0.0).unwrap();
            let nn = n as f64;
            let chi2 = polarizability(&p).chi.norm_sqr();
            for k in 1..=12u64 {
                let printed =
                    nn / ((nn + 1.0) * (nn + 2.0 * p.gamma)) * (1.0 - chi2.powi(k as i32 - 1));
                let cumulative = n_tot_h_closed_form(Horizon::Photons(k - 1), &p);
                assert!((printed - cumulative).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn weak_coupling_matches_phase_rotation() {
        // far detuned: |α| ≪ 1 and S_z(0)Re χ^k ≈ S_z(0) Re e^{iαk}
        let p = PhysicalParams::new(0.0, 200.0, 1.0, 0.0, 4).unwrap();
        let s = polarizability(&p);
        let series = s_z_series(50, 0.8, &s);
        for (k, v) in series.iter().enumerate() {
            let approx = 0.8 * (C64::new(0.0, 1.0) * s.alpha * k as f64).exp().re;
            assert!((v - approx).abs() <= 0.8 * s.alpha.norm_sqr() * k as f64 + 1e-15);
        }
    }

    #[test]
    fn photons_to_fraction_is_minimal() {
        let p = PhysicalParams::with_collective_cooperativity(4, 5.0, 0.0, 0.0).unwrap();
        let k = photons_to_fraction(&p, 0.9).unwrap();
        let sat = n_tot_h_closed_form(Horizon::Infinite, &p);
        assert!(n_tot_h_closed_form(Horizon::Photons(k), &p) >= 0.9 * sat);
        assert!(n_tot_h_closed_form(Horizon::Photons(k - 1), &p) < 0.9 * sat);
        assert!(photons_to_fraction(&p, 1.0).is_err());
    }

    #[test]
    fn reduced_matrix_validation() {
        let z = C64::new(0.0, 0.0);
        assert!(
            ReducedDensityMatrix::new(2, [[C64::new(0.5, 0.0), z], [z, C64::new(0.4, 0.0)]])
                .is_err()
        );
        assert!(ReducedDensityMatrix::new(
            2,
            [
                [C64::new(0.5, 0.0), C64::new(0.9, 0.0)],
                [C64::new(0.9, 0.0), C64::new(0.5, 0.0)]
            ]
        )
        .is_err());
    }
}
