use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ZenoError;

/// Photon polarization. Linear labels are fixed combinations of the
/// circular ones: `σ_H = (σ₊ + σ₋)/√2`, `σ_V = (σ₊ − σ₋)/√2`, which makes the
/// uniform product state dark for `V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarizationLabel {
    Plus,
    Minus,
    #[serde(rename = "H")]
    H,
    #[serde(rename = "V")]
    V,
}

impl PolarizationLabel {
    /// Coefficients `(c₊, c₋)` of the lowering operator on the circular legs.
    /// They are real, so the raising operator uses the same pair.
    pub fn circular_weights(self) -> (f64, f64) {
        match self {
            PolarizationLabel::Plus => (1.0, 0.0),
            PolarizationLabel::Minus => (0.0, 1.0),
            PolarizationLabel::H => (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            PolarizationLabel::V => (FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
        }
    }

    /// Weight of the leg that couples to ground level `bit` (0 = `|+⟩`).
    pub(crate) fn weight(self, bit: usize) -> f64 {
        let (p, m) = self.circular_weights();
        if bit == 0 {
            p
        } else {
            m
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PolarizationLabel::Plus => "plus",
            PolarizationLabel::Minus => "minus",
            PolarizationLabel::H => "H",
            PolarizationLabel::V => "V",
        }
    }
}

impl fmt::Display for PolarizationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolarizationLabel {
    type Err = ZenoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plus" | "+" | "sigma+" => Ok(PolarizationLabel::Plus),
            "minus" | "-" | "sigma-" => Ok(PolarizationLabel::Minus),
            "H" | "h" => Ok(PolarizationLabel::H),
            "V" | "v" => Ok(PolarizationLabel::V),
            other => Err(ZenoError::InvalidParameter(format!(
                "unknown polarization '{other}'"
            ))),
        }
    }
}

/// Complete pair of outgoing polarizations a detector resolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementBasis {
    #[serde(rename = "hv")]
    Linear,
    Circular,
}

impl MeasurementBasis {
    pub fn labels(self) -> [PolarizationLabel; 2] {
        match self {
            MeasurementBasis::Linear => [PolarizationLabel::H, PolarizationLabel::V],
            MeasurementBasis::Circular => [PolarizationLabel::Plus, PolarizationLabel::Minus],
        }
    }

    pub fn contains(self, pol: PolarizationLabel) -> bool {
        self.labels().contains(&pol)
    }

    /// Basis containing `pol`.
    pub fn of(pol: PolarizationLabel) -> Self {
        match pol {
            PolarizationLabel::H | PolarizationLabel::V => MeasurementBasis::Linear,
            _ => MeasurementBasis::Circular,
        }
    }
}

impl FromStr for MeasurementBasis {
    type Err = ZenoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hv" | "HV" | "linear" => Ok(MeasurementBasis::Linear),
            "circular" | "pm" => Ok(MeasurementBasis::Circular),
            other => Err(ZenoError::InvalidParameter(format!(
                "unknown measurement basis '{other}'"
            ))),
        }
    }
}

impl fmt::Display for MeasurementBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasurementBasis::Linear => f.write_str("hv"),
            MeasurementBasis::Circular => f.write_str("circular"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_weights_are_orthonormal() {
        let (hp, hm) = PolarizationLabel::H.circular_weights();
        let (vp, vm) = PolarizationLabel::V.circular_weights();
        assert!((hp * vp + hm * vm).abs() < 1e-15);
        assert!((hp * hp + hm * hm - 1.0).abs() < 1e-15);
        assert!((vp * vp + vm * vm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parse_labels() {
        assert_eq!(
            "plus".parse::<PolarizationLabel>().unwrap(),
            PolarizationLabel::Plus
        );
        assert_eq!(
            "V".parse::<PolarizationLabel>().unwrap(),
            PolarizationLabel::V
        );
        assert!("x".parse::<PolarizationLabel>().is_err());
        assert_eq!(
            "hv".parse::<MeasurementBasis>().unwrap(),
            MeasurementBasis::Linear
        );
    }
}
