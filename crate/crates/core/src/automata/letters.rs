//! Sets of program letters as 128-bit masks.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest supported program alphabet.
pub const MAX_LETTERS: usize = 128;

/// Id of the marker `indep_{a,b}` in an alphabet of `n` program letters: markers follow the
/// program letters, one per ordered pair of distinct letters.
pub fn marker_id(n: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < n && b < n && a != b);
    n + a * (n - 1) + if b > a { b - 1 } else { b }
}

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LetterSet(pub u128);

impl LetterSet {
    pub const EMPTY: LetterSet = LetterSet(0);

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_LETTERS);
        if n == MAX_LETTERS {
            LetterSet(u128::MAX)
        } else {
            LetterSet((1u128 << n) - 1)
        }
    }

    pub fn singleton(a: usize) -> Self {
        LetterSet(1u128 << a)
    }

    pub fn from_iter(it: impl IntoIterator<Item = usize>) -> Self {
        it.into_iter().fold(LetterSet::EMPTY, |s, a| s.with(a))
    }

    pub fn contains(self, a: usize) -> bool {
        self.0 >> a & 1 == 1
    }

    pub fn with(self, a: usize) -> Self {
        LetterSet(self.0 | 1u128 << a)
    }

    pub fn without(self, a: usize) -> Self {
        LetterSet(self.0 & !(1u128 << a))
    }

    pub fn union(self, o: Self) -> Self {
        LetterSet(self.0 | o.0)
    }

    pub fn inter(self, o: Self) -> Self {
        LetterSet(self.0 & o.0)
    }

    pub fn minus(self, o: Self) -> Self {
        LetterSet(self.0 & !o.0)
    }

    /// Complement relative to an `n`-letter alphabet.
    pub fn complement(self, n: usize) -> Self {
        LetterSet::full(n).minus(self)
    }

    pub fn is_subset(self, o: Self) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let a = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(a)
        })
    }
}

impl fmt::Debug for LetterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_algebra() {
        let s = LetterSet::from_iter([0, 3, 5]);
        assert!(s.contains(3) && !s.contains(4));
        assert_eq!(s.len(), 3);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 3, 5]);
        assert_eq!(s.complement(6), LetterSet::from_iter([1, 2, 4]));
        assert!(LetterSet::singleton(3).is_subset(s));
        assert_eq!(LetterSet::full(128).len(), 128);
        assert_eq!(s.without(3).with(1), LetterSet::from_iter([0, 1, 5]));
    }
}
