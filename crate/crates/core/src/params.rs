//! Model frequencies and rates.
//!
//! Everything is measured in units of the radiative rate into the cavity
//! mode, so `gamma1d` is normally `1.0`. It is kept as a field because the
//! scattering formulas carry it explicitly.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Atomic transition frequency.
    pub omega0: f64,
    /// Frequency of the incident photons.
    pub omega: f64,
    /// Radiative decay rate into the cavity mode.
    pub gamma1d: f64,
    /// Nonradiative decay rate.
    pub gamma: f64,
    /// Number of atoms in the ensemble.
    pub n_at: usize,
}

impl PhysicalParams {
    pub fn new(omega0: f64, omega: f64, gamma1d: f64, gamma: f64, n_at: usize) -> Result<Self> {
        let p = Self {
            omega0,
            omega,
            gamma1d,
            gamma,
            n_at,
        };
        p.validate()?;
        Ok(p)
    }

    /// Resonant, lossless drive with `gamma1d = 1`.
    pub fn resonant(n_at: usize) -> Result<Self> {
        Self::new(0.0, 0.0, 1.0, 0.0, n_at)
    }

    /// Chooses `gamma` so that the collective cooperativity equals `c_n`.
    /// `c_n = inf` gives a lossless ensemble.
    pub fn with_collective_cooperativity(
        n_at: usize,
        c_n: f64,
        omega0: f64,
        omega: f64,
    ) -> Result<Self> {
        if !(c_n > 0.0) {
            return Err(ZenoError::InvalidParameter(format!(
                "collective cooperativity must be positive, got {c_n}"
            )));
        }
        let gamma1d = 1.0;
        let gamma = if c_n.is_infinite() {
            0.0
        } else {
            gamma1d * (n_at as f64 + 1.0) / (2.0 * c_n)
        };
        Self::new(omega0, omega, gamma1d, gamma, n_at)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega0, self.omega, self.gamma1d, self.gamma]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(ZenoError::InvalidParameter(
                "frequencies and rates must be finite".into(),
            ));
        }
        if !(self.gamma1d > 0.0) {
            return Err(ZenoError::InvalidParameter(format!(
                "gamma1d must be positive, got {}",
                self.gamma1d
            )));
        }
        if self.gamma < 0.0 {
            return Err(ZenoError::InvalidParameter(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        if self.n_at < 1 {
            return Err(ZenoError::InvalidParameter(
                "n_at must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn detuning(&self) -> f64 {
        self.omega - self.omega0
    }

    /// C₁ = γ_1D / γ; infinite for a lossless atom.
    pub fn single_atom_cooperativity(&self) -> f64 {
        if self.gamma == 0.0 {
            f64::INFINITY
        } else {
            self.gamma1d / self.gamma
        }
    }

    /// C_N = γ_1D (N + 1) / (2γ).
    pub fn collective_cooperativity(&self) -> f64 {
        if self.gamma == 0.0 {
            f64::INFINITY
        } else {
            self.gamma1d * (self.n_at as f64 + 1.0) / (2.0 * self.gamma)
        }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_n_at(mut self, n_at: usize) -> Self {
        self.n_at = n_at;
        self
    }
}
