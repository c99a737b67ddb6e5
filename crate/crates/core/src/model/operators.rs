use nalgebra::DVector;

use super::basis::{insert_bit, SingleExcitedBasis};
use super::{ExcitedVector, GroundStateVector, PolarizationLabel, C64};
use crate::error::{Result, ZenoError};

/// `σ_ν^{tot,†} |ψ⟩`: maps a ground vector into the single-excited space.
pub fn apply_raising(state: &GroundStateVector, pol: PolarizationLabel) -> ExcitedVector {
    let n = state.n_at();
    let basis = SingleExcitedBasis::new(n);
    let mut out = DVector::<C64>::zeros(basis.dim());
    for (bits, amp) in state.amplitudes().iter().enumerate() {
        if *amp == C64::new(0.0, 0.0) {
            continue;
        }
        for atom in 0..n {
            let w = pol.weight((bits >> atom) & 1);
            if w != 0.0 {
                out[basis.excite(bits, atom)] += amp * w;
            }
        }
    }
    ExcitedVector::new(n, out).expect("dimension fixed by construction")
}

/// `σ_ν^{tot} |e⟩`: returns a single-excited vector to the ground space.
pub fn apply_lowering(state: &ExcitedVector, pol: PolarizationLabel) -> GroundStateVector {
    let n = state.n_at();
    let basis = SingleExcitedBasis::new(n);
    let mut out = DVector::<C64>::zeros(1usize << n);
    let (wp, wm) = pol.circular_weights();
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        let (atom, rest) = basis.entry(idx);
        if wp != 0.0 {
            out[insert_bit(rest, atom, 0)] += amp * wp;
        }
        if wm != 0.0 {
            out[insert_bit(rest, atom, 1)] += amp * wm;
        }
    }
    GroundStateVector::new(n, out).expect("dimension fixed by construction")
}

/// Applies a single-atom 2×2 operator (rows/columns ordered `|+⟩, |−⟩`) to
/// atom `atom` of a ground vector.
pub fn apply_local(amps: &DVector<C64>, atom: usize, op: &[[C64; 2]; 2]) -> DVector<C64> {
    let mut out = DVector::<C64>::zeros(amps.len());
    let mask = 1usize << atom;
    for lo in 0..amps.len() {
        if lo & mask != 0 {
            continue;
        }
        let hi = lo | mask;
        let (a0, a1) = (amps[lo], amps[hi]);
        out[lo] = op[0][0] * a0 + op[0][1] * a1;
        out[hi] = op[1][0] * a0 + op[1][1] * a1;
    }
    out
}

/// `Σ_j σ_out^{(j)} σ_in^{(j),†}` acting on a ground vector.
///
/// Cross terms `j ≠ j'` vanish on ground states, so the product of the
/// collective operators reduces to this single-atom sum.
pub fn pair_operator(
    state: &GroundStateVector,
    out_pol: PolarizationLabel,
    in_pol: PolarizationLabel,
) -> Result<GroundStateVector> {
    let n = state.n_at();
    if state.dim() != 1usize << n {
        return Err(ZenoError::InvalidState(
            "ground vector has wrong dimension".into(),
        ));
    }
    let mut local = [[C64::new(0.0, 0.0); 2]; 2];
    for (row, cells) in local.iter_mut().enumerate() {
        for (col, cell) in cells.iter_mut().enumerate() {
            *cell = C64::new(out_pol.weight(row) * in_pol.weight(col), 0.0);
        }
    }
    let mut acc = DVector::<C64>::zeros(state.dim());
    for atom in 0..n {
        acc += apply_local(state.amplitudes(), atom, &local);
    }
    GroundStateVector::new(n, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::dark_state;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn raising_defining_elements() {
        // |+⟩ --σ₊†--> |0⟩, |−⟩ is untouched by σ₊†
        let plus = GroundStateVector::basis_state(1, 0).unwrap();
        let e = apply_raising(&plus, PolarizationLabel::Plus);
        assert_eq!(e.amplitudes()[0], c(1.0));
        let minus = GroundStateVector::basis_state(1, 1).unwrap();
        assert_eq!(
            apply_raising(&minus, PolarizationLabel::Plus).norm_sqr(),
            0.0
        );
        assert_eq!(
            apply_raising(&minus, PolarizationLabel::Minus).amplitudes()[0],
            c(1.0)
        );
    }

    #[test]
    fn dark_state_is_dark_for_v() {
        for n in 1..=8 {
            let d = dark_state(n).unwrap();
            assert!(apply_raising(&d, PolarizationLabel::V).norm_sqr() < 1e-28);
            assert!(apply_raising(&d, PolarizationLabel::H).norm_sqr() > 0.5);
        }
    }

    #[test]
    fn lowering_is_adjoint_of_raising() {
        // ⟨e|σ†g⟩ = ⟨σ e|g⟩ for basis vectors
        for n in 1..=4 {
            let basis = SingleExcitedBasis::new(n);
            for pol in [
                PolarizationLabel::Plus,
                PolarizationLabel::Minus,
                PolarizationLabel::H,
                PolarizationLabel::V,
            ] {
                for g in 0..(1usize << n) {
                    let up = apply_raising(&GroundStateVector::basis_state(n, g).unwrap(), pol);
                    for e in 0..basis.dim() {
                        let mut ev = ExcitedVector::zeros(n).unwrap();
                        ev.amplitudes_mut()[e] = c(1.0);
                        let down = apply_lowering(&ev, pol);
                        assert!((up.amplitudes()[e] - down.amplitudes()[g]).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn symmetric_excited_norm() {
        // ⟨ψ₁|σ₊^{tot,†}σ₊^{tot}|ψ₁⟩ = N for the normalized symmetric W state over |+…+⟩
        for n in 1..=7 {
            let allplus = GroundStateVector::basis_state(n, 0).unwrap();
            let w = apply_raising(&allplus, PolarizationLabel::Plus);
            let norm = w.norm_sqr().sqrt();
            let w = ExcitedVector::new(n, w.into_amplitudes().unscale(norm)).unwrap();
            let lowered = apply_lowering(&w, PolarizationLabel::Plus);
            assert!((lowered.norm_sqr() - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_operator_vv_annihilates_dark_state() {
        for n in 1..=6 {
            let d = dark_state(n).unwrap();
            let out = pair_operator(&d, PolarizationLabel::V, PolarizationLabel::V).unwrap();
            assert!(out.norm_sqr() < 1e-28);
            // (H,H): (S + S_x) on the S_x = S state gives N
            let hh = pair_operator(&d, PolarizationLabel::H, PolarizationLabel::H).unwrap();
            let diff = hh.amplitudes() - d.amplitudes().scale(n as f64);
            assert!(diff.norm() < 1e-12);
        }
    }
}
