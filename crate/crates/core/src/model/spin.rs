//! Collective pseudospin `S = Σ_j s^{(j)}` over the ground manifold.
//!
//! Orientation: `s_x` has the dark superposition `(|+⟩+|−⟩)/√2` as its
//! `+1/2` eigenvector and `s_z|±⟩ = ∓|±⟩/2`, with `s_y` completing a
//! right-handed triple. In this frame a `σ₊ → σ₋` Raman flip moves the
//! collective spin from `+x` toward `+z`, and `exp(iφS_y)` rotates `+x`
//! toward `+z` as well.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::operators::apply_local;
use super::{GroundDensityMatrix, GroundStateVector, C64};
use crate::error::{Result, ZenoError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinAxis {
    X,
    Y,
    Z,
}

/// Single-atom `(s_x, s_y, s_z)` in the `|+⟩, |−⟩` basis.
pub fn single_spin_matrices() -> [[[C64; 2]; 2]; 3] {
    let z = C64::new(0.0, 0.0);
    let h = C64::new(0.5, 0.0);
    let ih = C64::new(0.0, 0.5);
    [[[z, h], [h, z]], [[z, ih], [-ih, z]], [[-h, z], [z, h]]]
}

impl SpinAxis {
    pub fn local(self) -> [[C64; 2]; 2] {
        let m = single_spin_matrices();
        match self {
            SpinAxis::X => m[0],
            SpinAxis::Y => m[1],
            SpinAxis::Z => m[2],
        }
    }
}

/// Dense collective spin matrices built as Kronecker sums
/// `Σ_j 1 ⊗ … ⊗ s^{(j)} ⊗ … ⊗ 1`. Atom `j` is bit `j` of the basis index.
pub fn collective_spin_matrices(n_at: usize) -> [DMatrix<C64>; 3] {
    let one = DMatrix::<C64>::identity(2, 2);
    let locals = single_spin_matrices();
    let mut out: [DMatrix<C64>; 3] = std::array::from_fn(|_| DMatrix::zeros(1 << n_at, 1 << n_at));
    for (axis, local) in locals.iter().enumerate() {
        let s = DMatrix::from_fn(2, 2, |r, c| local[r][c]);
        for atom in 0..n_at {
            // bit j is the j-th least significant, so atom 0 is the rightmost factor
            let mut term = DMatrix::<C64>::identity(1, 1);
            for k in (0..n_at).rev() {
                let f = if k == atom { &s } else { &one };
                term = term.kronecker(f);
            }
            out[axis] += term;
        }
    }
    out
}

/// Applies `S_axis` to a ground vector using per-atom updates.
pub fn apply_collective_spin(state: &GroundStateVector, axis: SpinAxis) -> GroundStateVector {
    let local = axis.local();
    let mut acc = nalgebra::DVector::<C64>::zeros(state.dim());
    for atom in 0..state.n_at() {
        acc += apply_local(state.amplitudes(), atom, &local);
    }
    GroundStateVector::new(state.n_at(), acc).expect("dimension preserved")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinObservables {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl SpinObservables {
    pub fn norm(&self) -> f64 {
        (self.sx * self.sx + self.sy * self.sy + self.sz * self.sz).sqrt()
    }

    pub fn xz_length_sqr(&self) -> f64 {
        self.sx * self.sx + self.sz * self.sz
    }
}

pub fn spin_expectations(state: &GroundStateVector) -> Result<SpinObservables> {
    let norm = state.norm_sqr();
    if !(norm > 0.0) {
        return Err(ZenoError::InvalidState(
            "spin expectations of a zero vector".into(),
        ));
    }
    let mut vals = [0.0; 3];
    for (v, axis) in vals.iter_mut().zip([SpinAxis::X, SpinAxis::Y, SpinAxis::Z]) {
        *v = state.inner(&apply_collective_spin(state, axis)).re / norm;
    }
    Ok(SpinObservables {
        sx: vals[0],
        sy: vals[1],
        sz: vals[2],
    })
}

pub fn spin_expectations_density(rho: &GroundDensityMatrix) -> Result<SpinObservables> {
    let tr = rho.trace();
    if !(tr > 0.0) {
        return Err(ZenoError::InvalidState(
            "spin expectations of a zero-trace density matrix".into(),
        ));
    }
    let m = rho.matrix();
    let dim = rho.dim();
    let locals = single_spin_matrices();
    let mut vals = [0.0; 3];
    // Tr(ρ s^{(j)}) = Σ_g Σ_b ρ[g, g'(b)] s[b, bit_j(g)], g' = g with bit j set to b
    for atom in 0..rho.n_at() {
        let mask = 1usize << atom;
        for g in 0..dim {
            let bg = (g >> atom) & 1;
            for b in 0..2 {
                let gp = (g & !mask) | (b << atom);
                let r = m[(g, gp)];
                for (v, local) in vals.iter_mut().zip(locals.iter()) {
                    let s = local[b][bg];
                    if s != C64::new(0.0, 0.0) {
                        *v += (r * s).re;
                    }
                }
            }
        }
    }
    Ok(SpinObservables {
        sx: vals[0] / tr,
        sy: vals[1] / tr,
        sz: vals[2] / tr,
    })
}
