use serde::{Deserialize, Serialize};

pub fn ground_dim(n_at: usize) -> usize {
    1usize << n_at
}

/// Drops bit `atom` from a ground bitstring.
#[inline]
pub(crate) fn remove_bit(bits: usize, atom: usize) -> usize {
    let low = bits & ((1usize << atom) - 1);
    let high = bits >> (atom + 1);
    low | (high << atom)
}

/// Inverse of [`remove_bit`]: reinserts `bit` at position `atom`.
#[inline]
pub(crate) fn insert_bit(rest: usize, atom: usize, bit: usize) -> usize {
    let low = rest & ((1usize << atom) - 1);
    let high = rest >> atom;
    low | (bit << atom) | (high << (atom + 1))
}

/// Single-excited states `(n, rest)`: atom `n` in `|0⟩`, the other atoms in
/// the bitstring `rest` (bit order skips `n`). Index is `n·2^(N−1) + rest`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingleExcitedBasis {
    n_at: usize,
}

impl SingleExcitedBasis {
    pub fn new(n_at: usize) -> Self {
        Self { n_at }
    }

    pub fn n_at(&self) -> usize {
        self.n_at
    }

    pub fn dim(&self) -> usize {
        self.n_at * self.block()
    }

    #[inline]
    pub(crate) fn block(&self) -> usize {
        1usize << (self.n_at - 1)
    }

    #[inline]
    pub fn index(&self, atom: usize, rest: usize) -> usize {
        atom * self.block() + rest
    }

    #[inline]
    pub fn entry(&self, index: usize) -> (usize, usize) {
        (index / self.block(), index % self.block())
    }

    /// Index of the state reached by exciting `atom` out of ground `bits`.
    #[inline]
    pub(crate) fn excite(&self, bits: usize, atom: usize) -> usize {
        self.index(atom, remove_bit(bits, atom))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.dim()).map(move |i| self.entry(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn bit_insert_remove_are_inverse() {
        for n in 1..=6 {
            for atom in 0..n {
                for bits in 0..(1usize << n) {
                    let bit = (bits >> atom) & 1;
                    assert_eq!(insert_bit(remove_bit(bits, atom), atom, bit), bits);
                }
            }
        }
    }

    #[test]
    fn enumeration_is_a_bijection() {
        for n in 1..=7 {
            let basis = SingleExcitedBasis::new(n);
            assert_eq!(basis.dim(), n << (n - 1));
            let seen: HashSet<_> = basis.iter().collect();
            assert_eq!(seen.len(), basis.dim());
            for (i, (atom, rest)) in basis.iter().enumerate() {
                assert!(atom < n && rest < basis.block());
                assert_eq!(basis.index(atom, rest), i);
            }
            // every (ground, atom) pair lands on a distinct excited state per bit value
            let mut hit = HashSet::new();
            for bits in 0..ground_dim(n) {
                for atom in 0..n {
                    hit.insert((basis.excite(bits, atom), (bits >> atom) & 1));
                }
            }
            assert_eq!(hit.len(), 2 * basis.dim());
        }
    }
}
