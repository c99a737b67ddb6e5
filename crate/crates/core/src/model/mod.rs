//! Bases, states, photon polarizations and collective operators shared by
//! the exact and collective engines.
//!
//! Ground states are stored over the `2^N` product basis. Bit `j` of a basis
//! index is atom `j`: `0` is `|+⟩`, `1` is `|−⟩`. The single-excited basis
//! holds one atom in `|0⟩` and a bitstring over the others.

mod basis;
mod operators;
mod polarization;
mod spin;
mod state;

pub(crate) use basis::insert_bit as basis_insert_bit;
pub use basis::{ground_dim, SingleExcitedBasis};
pub use operators::{apply_local, apply_lowering, apply_raising, pair_operator};
pub use polarization::{MeasurementBasis, PolarizationLabel};
pub use spin::{
    apply_collective_spin, collective_spin_matrices, single_spin_matrices, spin_expectations,
    spin_expectations_density, SpinAxis, SpinObservables,
};
pub use state::{dark_state, ExcitedVector, GroundDensityMatrix, GroundStateVector};

pub type C64 = num_complex::Complex64;

/// Largest ensemble the dense ground-space routines accept.
pub const MAX_DENSE_ATOMS: usize = 16;
