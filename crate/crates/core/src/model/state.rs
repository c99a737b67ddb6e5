use nalgebra::{DMatrix, DVector};

use super::basis::{ground_dim, SingleExcitedBasis};
use super::{C64, MAX_DENSE_ATOMS};
use crate::error::{Result, ZenoError};

fn check_atoms(n_at: usize) -> Result<()> {
    if n_at < 1 {
        return Err(ZenoError::InvalidParameter(
            "n_at must be at least 1".into(),
        ));
    }
    if n_at > MAX_DENSE_ATOMS {
        return Err(ZenoError::ResourceLimit(format!(
            "n_at = {n_at} exceeds the dense limit of {MAX_DENSE_ATOMS}"
        )));
    }
    Ok(())
}

/// Complex amplitudes over the `2^N` ground product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateVector {
    n_at: usize,
    amplitudes: DVector<C64>,
}

impl GroundStateVector {
    pub fn new(n_at: usize, amplitudes: DVector<C64>) -> Result<Self> {
        check_atoms(n_at)?;
        if amplitudes.len() != ground_dim(n_at) {
            return Err(ZenoError::InvalidState(format!(
                "ground vector of length {} does not match 2^{n_at}",
                amplitudes.len()
            )));
        }
        Ok(Self { n_at, amplitudes })
    }

    pub fn from_vec(n_at: usize, amplitudes: Vec<C64>) -> Result<Self> {
        Self::new(n_at, DVector::from_vec(amplitudes))
    }

    pub fn zeros(n_at: usize) -> Result<Self> {
        check_atoms(n_at)?;
        Ok(Self {
            n_at,
            amplitudes: DVector::zeros(ground_dim(n_at)),
        })
    }

    pub fn basis_state(n_at: usize, bits: usize) -> Result<Self> {
        let mut s = Self::zeros(n_at)?;
        if bits >= s.dim() {
            return Err(ZenoError::InvalidState(format!(
                "basis index {bits} out of range"
            )));
        }
        s.amplitudes[bits] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn n_at(&self) -> usize {
        self.n_at
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) {
            return Err(ZenoError::InvalidState(
                "cannot normalize a zero vector".into(),
            ));
        }
        Ok(Self {
            n_at: self.n_at,
            amplitudes: self.amplitudes.unscale(n),
        })
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            n_at: self.n_at,
            amplitudes: self.amplitudes.map(|a| a * factor),
        }
    }

    /// Projector `|ψ⟩⟨ψ|` (unnormalized).
    pub fn to_density(&self) -> GroundDensityMatrix {
        GroundDensityMatrix {
            n_at: self.n_at,
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Uniform product state `⊗ (|+⟩ + |−⟩)/√2`, the `S_x = N/2` eigenstate that
/// does not couple to `V` photons.
pub fn dark_state(n_at: usize) -> Result<GroundStateVector> {
    check_atoms(n_at)?;
    let dim = ground_dim(n_at);
    let a = C64::new((dim as f64).sqrt().recip(), 0.0);
    GroundStateVector::new(n_at, DVector::from_element(dim, a))
}

/// Amplitudes over the single-excited basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitedVector {
    n_at: usize,
    amplitudes: DVector<C64>,
}

impl ExcitedVector {
    pub fn new(n_at: usize, amplitudes: DVector<C64>) -> Result<Self> {
        check_atoms(n_at)?;
        let dim = SingleExcitedBasis::new(n_at).dim();
        if amplitudes.len() != dim {
            return Err(ZenoError::InvalidState(format!(
                "excited vector of length {} does not match N·2^(N−1) = {dim}",
                amplitudes.len()
            )));
        }
        Ok(Self { n_at, amplitudes })
    }

    pub fn zeros(n_at: usize) -> Result<Self> {
        check_atoms(n_at)?;
        Ok(Self {
            n_at,
            amplitudes: DVector::zeros(SingleExcitedBasis::new(n_at).dim()),
        })
    }

    pub fn n_at(&self) -> usize {
        self.n_at
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Density matrix over the ground product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundDensityMatrix {
    n_at: usize,
    matrix: DMatrix<C64>,
}

impl GroundDensityMatrix {
    pub fn new(n_at: usize, matrix: DMatrix<C64>) -> Result<Self> {
        check_atoms(n_at)?;
        let dim = ground_dim(n_at);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(ZenoError::InvalidState(format!(
                "density matrix is {}x{}, expected {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { n_at, matrix })
    }

    pub fn from_pure(state: &GroundStateVector) -> Result<Self> {
        let n = state.normalized()?;
        Ok(n.to_density())
    }

    pub fn n_at(&self) -> usize {
        self.n_at
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Largest entrywise deviation from hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if !(t > 0.0) || !t.is_finite() {
            return Err(ZenoError::DegenerateState(format!(
                "density matrix trace {t} cannot be normalized"
            )));
        }
        Ok(Self {
            n_at: self.n_at,
            matrix: self.matrix.unscale(t),
        })
    }

    /// `⟨ψ|ρ|ψ⟩` for a ground vector.
    pub fn overlap(&self, state: &GroundStateVector) -> f64 {
        let v = state.amplitudes();
        (v.adjoint() * &self.matrix * v)[(0, 0)].re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dark_state_amplitudes() {
        let d1 = dark_state(1).unwrap();
        for a in d1.amplitudes().iter() {
            assert!((a.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15 && a.im == 0.0);
        }
        let d2 = dark_state(2).unwrap();
        assert!(d2.amplitudes().iter().all(|a| (a.re - 0.5).abs() < 1e-15));
        let d3 = dark_state(3).unwrap();
        assert!(d3
            .amplitudes()
            .iter()
            .all(|a| (a.re - 2f64.powf(-1.5)).abs() < 1e-15));
        for n in 1..=10 {
            assert!((dark_state(n).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dark_state_rejects_empty_ensemble() {
        assert!(matches!(dark_state(0), Err(ZenoError::InvalidParameter(_))));
        assert!(matches!(dark_state(40), Err(ZenoError::ResourceLimit(_))));
    }

    #[test]
    fn dimension_checks() {
        assert!(GroundStateVector::from_vec(2, vec![C64::new(1.0, 0.0); 3]).is_err());
        assert!(ExcitedVector::new(3, DVector::zeros(8)).is_err());
        assert!(ExcitedVector::new(3, DVector::zeros(12)).is_ok());
        assert!(GroundDensityMatrix::new(2, DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn zero_trace_is_degenerate() {
        let rho = GroundDensityMatrix::new(1, DMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(
            rho.normalized(),
            Err(ZenoError::DegenerateState(_))
        ));
    }
}
