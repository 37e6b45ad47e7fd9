//! Semi-independence relations of a program language.
//!
//! The contextual relation labels every DFA state `q` with the pairs `(a, b)` such that the
//! language after `ab` is included in the language after `ba`; swapping `ab` into `ba` at
//! such a point never leaves the program. The static relation keeps the pairs present at
//! every reachable state. Semantic soundness (`⟦ab⟧ ⊆ ⟦ba⟧`) is a separate, solver-backed
//! filter.

use std::fmt::Write as _;

use crate::automata::{marker_id, Dfa, HoareOracle, InclusionTable, LetterSet};
use crate::error::Result;
use crate::logic::term::Term;

/// A relation over letters as rows: `row(a) = {b | (a, b) ∈ I}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    rows: Vec<LetterSet>,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        Relation { rows: vec![LetterSet::EMPTY; n] }
    }

    /// All irreflexive pairs.
    pub fn full(n: usize) -> Self {
        Relation { rows: (0..n).map(|a| LetterSet::full(n).without(a)).collect() }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut r = Relation::empty(n);
        for (a, b) in pairs {
            r.insert(a, b);
        }
        r
    }

    pub fn letters(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, a: usize) -> LetterSet {
        self.rows[a]
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.rows[a].contains(b)
    }

    pub fn insert(&mut self, a: usize, b: usize) {
        self.rows[a] = self.rows[a].with(b);
    }

    pub fn remove(&mut self, a: usize, b: usize) {
        self.rows[a] = self.rows[a].without(b);
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().enumerate().flat_map(|(a, r)| r.iter().map(move |b| (a, b)))
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    pub fn is_irreflexive(&self) -> bool {
        self.rows.iter().enumerate().all(|(a, r)| !r.contains(a))
    }

    pub fn is_subset(&self, o: &Relation) -> bool {
        self.rows.iter().zip(&o.rows).all(|(x, y)| x.is_subset(*y))
    }

    pub fn inter(&self, o: &Relation) -> Relation {
        Relation { rows: self.rows.iter().zip(&o.rows).map(|(x, y)| x.inter(*y)).collect() }
    }

    /// Pairs present in both directions.
    pub fn symmetric_part(&self) -> Relation {
        let n = self.letters();
        let mut r = Relation::empty(n);
        for (a, b) in self.pairs() {
            if self.contains(b, a) {
                r.insert(a, b);
            }
        }
        r
    }
}

/// The per-state labelling `F′` of a DFA.
#[derive(Clone, Debug)]
pub struct ContextualIndependence {
    pub labels: Vec<Relation>,
}

impl ContextualIndependence {
    pub fn label(&self, q: u32) -> &Relation {
        &self.labels[q as usize]
    }
}

/// `label(q) = {(a,b) | a ≠ b ∧ L(δ(q,ab)) ⊆ L(δ(q,ba))}` for every state.
pub fn maximal_contextual(dfa: &Dfa) -> ContextualIndependence {
    let table = InclusionTable::compute(dfa);
    maximal_contextual_with(dfa, &table)
}

pub fn maximal_contextual_with(dfa: &Dfa, table: &InclusionTable) -> ContextualIndependence {
    let n = dfa.letters;
    let labels = (0..dfa.states as u32)
        .map(|q| {
            let mut r = Relation::empty(n);
            for a in 0..n {
                for b in 0..n {
                    if a != b {
                        let ab = dfa.run(q, &[a, b]);
                        let ba = dfa.run(q, &[b, a]);
                        if table.get(ab as usize, ba as usize) {
                            r.insert(a, b);
                        }
                    }
                }
            }
            r
        })
        .collect();
    ContextualIndependence { labels }
}

/// Intersection of the labels over reachable states: the largest relation under which the
/// whole language is closed, whatever the context.
pub fn maximal_static(dfa: &Dfa, ci: &ContextualIndependence) -> Relation {
    let reach = dfa.reachable();
    let mut r = Relation::full(dfa.letters);
    for (q, seen) in reach.iter().enumerate() {
        if *seen {
            r = r.inter(&ci.labels[q]);
        }
    }
    r
}

/// Keeps the pairs whose commutation `⟦ab⟧ ⊆ ⟦ba⟧` holds in every state, i.e. whose
/// marker is blocked from `true`. Unknown answers drop the pair.
pub fn filter_sound_static(oracle: &dyn HoareOracle, rel: &Relation) -> Result<Relation> {
    let n = rel.letters();
    let mut out = Relation::empty(n);
    let pairs: Vec<(usize, usize)> = rel.pairs().collect();
    let markers: Vec<usize> = pairs.iter().map(|&(a, b)| marker_id(n, a, b)).collect();
    let ok = oracle.blocks_many(&Term::Bool(true), &markers)?;
    for ((a, b), sound) in pairs.into_iter().zip(ok) {
        if sound {
            out.insert(a, b);
        }
    }
    Ok(out)
}

/// Soundness status of one ordered pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SoundnessVerdict {
    /// The commutation holds from every state.
    SoundEverywhere,
    /// Not everywhere, but proven in the given context.
    Contextual,
    Unsound,
}

/// Classifies `(a, b)` at a context given as a set of assertions (a proof state).
pub fn soundness(oracle: &dyn HoareOracle, n: usize, a: usize, b: usize, context: &[Term]) -> Result<SoundnessVerdict> {
    let m = marker_id(n, a, b);
    if oracle.hoare(&Term::Bool(true), m, &Term::Bool(false))? {
        return Ok(SoundnessVerdict::SoundEverywhere);
    }
    for phi in context {
        if oracle.hoare(phi, m, &Term::Bool(false))? {
            return Ok(SoundnessVerdict::Contextual);
        }
    }
    Ok(SoundnessVerdict::Unsound)
}

/// Tab-separated `a b` lines.
pub fn dump_static(rel: &Relation, name: &dyn Fn(usize) -> String) -> String {
    let mut s = String::new();
    for (a, b) in rel.pairs() {
        let _ = writeln!(s, "{}\t{}", name(a), name(b));
    }
    s
}

/// Tab-separated `q a b` lines, optionally skipping one state (the sink).
pub fn dump_contextual(ci: &ContextualIndependence, name: &dyn Fn(usize) -> String, skip: Option<u32>) -> String {
    let mut s = String::new();
    for (q, rel) in ci.labels.iter().enumerate() {
        if Some(q as u32) == skip {
            continue;
        }
        for (a, b) in rel.pairs() {
            let _ = writeln!(s, "{q}\t{}\t{}", name(a), name(b));
        }
    }
    s
}
