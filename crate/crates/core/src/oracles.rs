//! Closed-form reference amplitudes.
//!
//! Nothing here touches the matrix code in [`crate::exact`]; these are scalar
//! formulas used to check it.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::model::C64;
use crate::params::PhysicalParams;

const I: C64 = C64::new(0.0, 1.0);

/// Scattered ground states for one `σ₊` photon on the dark state, expanded in
/// the little-endian product basis (bit `j` set means atom `j` in `|−⟩`).
#[derive(Debug, Clone, PartialEq)]
pub struct OracleAmplitudes {
    /// `ψ_{+→+}`
    pub no_flip: Vec<C64>,
    /// `ψ_{+→−}`
    pub flip: Vec<C64>,
}

impl OracleAmplitudes {
    pub fn probabilities(&self) -> (f64, f64) {
        let p = |v: &[C64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>();
        (p(&self.no_flip), p(&self.flip))
    }
}

fn require_atoms(params: &PhysicalParams, n: usize) -> Result<()> {
    params.validate()?;
    if params.n_at != n {
        return Err(ZenoError::InvalidParameter(format!(
            "oracle needs n_at = {n}, got {}",
            params.n_at
        )));
    }
    Ok(())
}

/// One atom in `(|+⟩ + |−⟩)/√2`:
/// `ψ_{+→+} = (1/√2)[(Δ + iγ)/(Δ + iγ_1D + iγ)|+⟩ + |−⟩]`,
/// `ψ_{+→−} = −(1/√2) iγ_1D/(Δ + iγ_1D + iγ)|−⟩`, with `Δ = ω − ω₀`.
pub fn n1_amplitudes(params: &PhysicalParams) -> Result<OracleAmplitudes> {
    require_atoms(params, 1)?;
    let d = params.detuning();
    let g = params.gamma1d;
    let denom = C64::new(d, g + params.gamma);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(OracleAmplitudes {
        no_flip: vec![C64::new(d, params.gamma) / denom * s, C64::new(s, 0.0)],
        flip: vec![C64::new(0.0, 0.0), -(I * g) / denom * s],
    })
}

/// Two atoms in the dark state. With `p = −iγ_1D/(Δ + 3iγ_1D/2 + iγ)`:
/// `ψ_{+→+} = ½(1,1,1,1) + ½p(2,1,1,0)`, `ψ_{+→−} = ½p(0,1,1,2)`
/// over `|++⟩, |−+⟩, |+−⟩, |−−⟩`.
pub fn n2_amplitudes(params: &PhysicalParams) -> Result<OracleAmplitudes> {
    require_atoms(params, 2)?;
    let g = params.gamma1d;
    let p = -(I * g) / C64::new(params.detuning(), 1.5 * g + params.gamma);
    let half = 0.5;
    let no_flip = [2.0, 1.0, 1.0, 0.0]
        .iter()
        .map(|&w| C64::new(half, 0.0) + p * (half * w))
        .collect();
    let flip = [0.0, 1.0, 1.0, 2.0]
        .iter()
        .map(|&w| p * (half * w))
        .collect();
    Ok(OracleAmplitudes { no_flip, flip })
}

/// Reflection of `σ₊` from a Λ ensemble prepared in `|+…+⟩`. The emitted
/// `σ₋` leg broadens the pole to `(N+1)γ_1D/2`:
/// `r = 1 + iNγ_1D/(ω₀ − i(N+1)γ_1D/2 − iγ − ω)`.
pub fn polarized_lambda_reflection(params: &PhysicalParams) -> Result<C64> {
    params.validate()?;
    let n = params.n_at as f64;
    let g = params.gamma1d;
    let denom = C64::new(
        params.omega0 - params.omega,
        -(n + 1.0) * g / 2.0 - params.gamma,
    );
    Ok(C64::new(1.0, 0.0) + I * (n * g) / denom)
}

/// Reflection of `N` lossless two-level atoms with all-to-all coupling
/// `[H₁]_{mn} = ω₀δ_{mn} − iγ_1D/2`, obtained from the symmetric pole:
/// `r = (Δ' + iNγ_1D/2)/(Δ' − iNγ_1D/2)`, `Δ' = ω₀ − ω`.
pub fn two_level_reflection(omega: f64, omega0: f64, gamma1d: f64, n_at: usize) -> C64 {
    let half_width = n_at as f64 * gamma1d / 2.0;
    let d = omega0 - omega;
    C64::new(d, half_width) / C64::new(d, -half_width)
}

/// Atoms at a perfect back mirror with a partially reflecting front mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AirySystem {
    pub omega0: f64,
    /// Bare decay rate into one waveguide direction.
    pub gamma1d0: f64,
    /// Front-mirror amplitude reflection, `0 ≤ ρ < 1`.
    pub rho: f64,
}

impl AirySystem {
    pub fn new(omega0: f64, gamma1d0: f64, rho: f64) -> Result<Self> {
        let s = Self {
            omega0,
            gamma1d0,
            rho,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.abs() < 1.0) {
            return Err(ZenoError::InvalidParameter(format!(
                "mirror reflection must satisfy |rho| < 1, got {}",
                self.rho
            )));
        }
        if !(self.gamma1d0 > 0.0) || !self.omega0.is_finite() {
            return Err(ZenoError::InvalidParameter(
                "gamma1d0 must be positive and omega0 finite".into(),
            ));
        }
        Ok(())
    }

    pub fn tau_sqr(&self) -> f64 {
        1.0 - self.rho * self.rho
    }

    /// Cavity-enhanced rate `2γ_1D⁽⁰⁾(1+ρ)/(1−ρ)`.
    pub fn effective_gamma1d(&self) -> f64 {
        2.0 * self.gamma1d0 * (1.0 + self.rho) / (1.0 - self.rho)
    }
}

/// Multiple-reflection sum. Bare reflection `r₀ = (iNγ/2)/(Δ' − iNγ/2)`,
/// `t₀ = 1 + r₀`; the back mirror closes the loop to
/// `r₁ = r₀ + t₀²/(1 − r₀)`; the front mirror gives
/// `r̃ = −ρ + τ² r₁/(1 − ρ r₁)`.
pub fn airy_reflection(omega: f64, sys: &AirySystem, n_at: usize) -> Result<C64> {
    sys.validate()?;
    if n_at < 1 {
        return Err(ZenoError::InvalidParameter(
            "n_at must be at least 1".into(),
        ));
    }
    let one = C64::new(1.0, 0.0);
    let a = I * (n_at as f64 * sys.gamma1d0 / 2.0);
    let r0 = a / (C64::new(sys.omega0 - omega, 0.0) - a);
    let t0 = one + r0;
    let r1 = r0 + t0 * t0 / (one - r0);
    Ok(-sys.rho + sys.tau_sqr() * r1 / (one - sys.rho * r1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn n1_resonance() {
        let p = PhysicalParams::resonant(1).unwrap();
        let a = n1_amplitudes(&p).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(a.no_flip[0], C64::new(0.0, 0.0), 1e-15));
        assert!(close(a.no_flip[1], C64::new(s, 0.0), 1e-15));
        assert!(close(a.flip[1], C64::new(-s, 0.0), 1e-15));
    }

    #[test]
    fn n1_detuned_by_linewidth() {
        let p = PhysicalParams::new(0.0, 1.0, 1.0, 0.0, 1).unwrap();
        let (_, flip) = n1_amplitudes(&p).unwrap().probabilities();
        assert!((flip - 0.25).abs() < 1e-15);
    }

    #[test]
    fn n1_and_n2_unitary_without_loss() {
        for omega in [-3.0, -0.4, 0.0, 0.7, 5.0] {
            let a = n1_amplitudes(&PhysicalParams::new(0.0, omega, 1.0, 0.0, 1).unwrap()).unwrap();
            let (x, y) = a.probabilities();
            assert!((x + y - 1.0).abs() < 1e-14);
            let b = n2_amplitudes(&PhysicalParams::new(0.0, omega, 1.0, 0.0, 2).unwrap()).unwrap();
            let (x, y) = b.probabilities();
            assert!((x + y - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn n2_resonant_flip_prefactor() {
        let a = n2_amplitudes(&PhysicalParams::resonant(2).unwrap()).unwrap();
        let expect = [0.0, -1.0 / 3.0, -1.0 / 3.0, -2.0 / 3.0];
        for (c, e) in a.flip.iter().zip(expect) {
            assert!(close(*c, C64::new(e, 0.0), 1e-15));
        }
    }

    #[test]
    fn n2_pole_half_width() {
        // |p|² falls to half its peak at Δ = ±3γ_1D/2
        let peak = n2_amplitudes(&PhysicalParams::resonant(2).unwrap())
            .unwrap()
            .probabilities()
            .1;
        let edge = n2_amplitudes(&PhysicalParams::new(0.0, 1.5, 1.0, 0.0, 2).unwrap())
            .unwrap()
            .probabilities()
            .1;
        assert!((edge - peak / 2.0).abs() < 1e-14);
    }

    #[test]
    fn oracle_rejects_wrong_size() {
        assert!(n1_amplitudes(&PhysicalParams::resonant(2).unwrap()).is_err());
        assert!(n2_amplitudes(&PhysicalParams::resonant(1).unwrap()).is_err());
    }

    #[test]
    fn airy_without_front_mirror_doubles_rate() {
        let sys = AirySystem::new(0.0, 0.7, 0.0).unwrap();
        for omega in [-2.0, -0.1, 0.0, 0.3, 4.0] {
            let r = airy_reflection(omega, &sys, 3).unwrap();
            let d = -omega;
            let g = 3.0 * 0.7;
            assert!(close(r, C64::new(d, g) / C64::new(d, -g), 1e-13));
        }
    }

    #[test]
    fn airy_resonance_is_pi_phase() {
        for rho in [0.0, 0.3, 0.9] {
            let sys = AirySystem::new(0.2, 1.0, rho).unwrap();
            let r = airy_reflection(0.2, &sys, 2).unwrap();
            assert!(close(r, C64::new(-1.0, 0.0), 1e-12));
        }
    }

    #[test]
    fn airy_matches_green_reflection() {
        for &(omega, rho, n) in &[(0.3, 0.5, 1usize), (-1.2, 0.8, 4), (2.5, 0.1, 7)] {
            let sys = AirySystem::new(0.0, 0.4, rho).unwrap();
            let r = airy_reflection(omega, &sys, n).unwrap();
            let g = two_level_reflection(omega, 0.0, sys.effective_gamma1d(), n);
            assert!(close(r, g, 1e-12));
            assert!((r.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn airy_rejects_opaque_mirror() {
        assert!(AirySystem::new(0.0, 1.0, 1.0).is_err());
        let bad = AirySystem {
            omega0: 0.0,
            gamma1d0: 1.0,
            rho: -1.5,
        };
        assert!(airy_reflection(0.0, &bad, 1).is_err());
    }

    #[test]
    fn effective_rate_increases_with_rho() {
        let mut last = 0.0;
        for k in 0..20 {
            let g = AirySystem::new(0.0, 1.0, k as f64 / 20.0)
                .unwrap()
                .effective_gamma1d();
            assert!(g > last);
            last = g;
        }
    }

    #[test]
    fn two_level_reflection_matches_dense_solve() {
        use nalgebra::{DMatrix, DVector};
        for n in 1..=5 {
            let (omega, omega0, g) = (0.37, -0.2, 1.3);
            let h = DMatrix::from_fn(n, n, |i, j| {
                let diag = if i == j {
                    C64::new(omega0 - omega, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                diag - I * (g / 2.0)
            });
            let ones = DVector::from_element(n, C64::new(1.0, 0.0));
            let x = h.lu().solve(&ones).unwrap();
            let r = C64::new(1.0, 0.0) + I * g * ones.dotc(&x);
            assert!(close(r, two_level_reflection(omega, omega0, g, n), 1e-12));
        }
    }

    #[test]
    fn polarized_lambda_pole() {
        let p = PhysicalParams::resonant(3).unwrap();
        // r = 1 − 2N/(N+1) at resonance
        assert!(close(
            polarized_lambda_reflection(&p).unwrap(),
            C64::new(-0.5, 0.0),
            1e-15
        ));
    }
}
