//! Antichains of letter sets, representing downward-closed families by their maximal
//! elements.

use serde::Serialize;

use crate::automata::LetterSet;

/// Pairwise ⊆-incomparable sets, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Antichain(Vec<LetterSet>);

impl Antichain {
    pub fn empty() -> Self {
        Antichain(Vec::new())
    }

    pub fn singleton(s: LetterSet) -> Self {
        Antichain(vec![s])
    }

    /// Maximal elements of `sets`.
    pub fn from_sets(sets: impl IntoIterator<Item = LetterSet>) -> Self {
        let mut out = Antichain::empty();
        for s in sets {
            out.insert(s);
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn elements(&self) -> &[LetterSet] {
        &self.0
    }

    /// Whether `s` is in the represented downward-closed family.
    pub fn covers(&self, s: LetterSet) -> bool {
        self.0.iter().any(|x| s.is_subset(*x))
    }

    /// Adds `s` unless it is already covered, dropping elements it subsumes. Returns whether
    /// the family grew.
    pub fn insert(&mut self, s: LetterSet) -> bool {
        if self.covers(s) {
            return false;
        }
        self.0.retain(|x| !x.is_subset(s));
        let pos = self.0.binary_search(&s).unwrap_or_else(|p| p);
        self.0.insert(pos, s);
        true
    }

    /// `max(X ∪ Y)`.
    pub fn join(&self, o: &Antichain) -> Antichain {
        let mut out = self.clone();
        for s in &o.0 {
            out.insert(*s);
        }
        out
    }

    /// `max {x ∩ y}`.
    pub fn meet(&self, o: &Antichain) -> Antichain {
        let mut out = Antichain::empty();
        for x in &self.0 {
            for y in &o.0 {
                out.insert(x.inter(*y));
            }
        }
        out
    }

    /// Family inclusion: every element of `self` lies below some element of `o`.
    pub fn leq(&self, o: &Antichain) -> bool {
        self.0.iter().all(|x| o.covers(*x))
    }

    pub fn is_antichain(&self) -> bool {
        self.0.iter().enumerate().all(|(i, x)| self.0.iter().enumerate().all(|(j, y)| i == j || !x.is_subset(*y)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ls(v: &[usize]) -> LetterSet {
        LetterSet::from_iter(v.iter().copied())
    }

    #[test]
    fn insert_keeps_maximal_elements() {
        let mut a = Antichain::empty();
        assert!(a.insert(ls(&[0])));
        assert!(a.insert(ls(&[1])));
        assert!(a.insert(ls(&[0, 1])));
        assert_eq!(a.elements(), &[ls(&[0, 1])]);
        assert!(!a.insert(ls(&[1])));
    }

    #[test]
    fn meet_and_join() {
        let x = Antichain::from_sets([ls(&[0, 1]), ls(&[2])]);
        let y = Antichain::from_sets([ls(&[1, 2])]);
        assert_eq!(x.meet(&y), Antichain::from_sets([ls(&[1]), ls(&[2])]));
        assert_eq!(x.join(&y), Antichain::from_sets([ls(&[0, 1]), ls(&[1, 2])]));
        assert!(x.meet(&y).leq(&x) && x.meet(&y).leq(&y));
        assert!(x.leq(&x.join(&y)));
        assert!(Antichain::empty().leq(&x));
    }
}
