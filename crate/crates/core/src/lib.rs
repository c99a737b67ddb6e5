//! Repeated single-photon scattering on an ensemble of Λ-level atoms
//! collectively coupled to a one-sided cavity.
//!
//! Two engines share the [`model`] layer:
//!
//! * [`exact`] works in the full `2^N` ground space and the `N·2^(N−1)`
//!   single-excited space, applying the cavity Green function by dense solves.
//! * [`collective`] uses the closed forms available once the ensemble is
//!   restricted to the two collective states `S_x = N/2` and `S_x = N/2 − 1`.
//!
//! [`protocol`] chains photon events (and optional spin rotations from a
//! static field) into per-photon traces; [`oracles`] holds independent
//! closed-form references; [`validation`] bundles self-checks used by the CLI.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collective;
pub mod error;
pub mod exact;
pub mod model;
pub mod oracles;
pub mod params;
pub mod protocol;
pub mod validation;

pub use error::{Result, ZenoError};
pub use model::{
    dark_state, GroundDensityMatrix, GroundStateVector, MeasurementBasis, PolarizationLabel,
    SpinObservables, C64,
};
pub use params::PhysicalParams;
