//! The proof automaton: an NFA over assertions whose transitions are valid Hoare triples,
//! and its lazily determinized view.
//!
//! Assertion `0` is `true` (initial) and `1` is `false` (the only final assertion). A word
//! is in `L(Π)` when the determinized run reaches a set containing `false`. Since
//! `{false} a {ψ}` holds for every `ψ`, all false-containing sets accept every continuation,
//! so they are collapsed into the single absorbing state [`ProofAutomaton::FALSE`].

use std::collections::HashMap;

use serde::Serialize;

use crate::error::Result;
use crate::logic::term::Term;
use crate::logic::Logic;

/// Interned id of a determinized state.
pub type DetState = u32;

/// Source of Hoare-triple validity.
pub trait HoareOracle {
    fn hoare(&self, phi: &Term, a: usize, psi: &Term) -> Result<bool>;

    fn hoare_many(&self, phi: &Term, a: usize, psis: &[&Term]) -> Result<Vec<bool>> {
        psis.iter().map(|psi| self.hoare(phi, a, psi)).collect()
    }

    /// `{φ} a {false}` for several letters.
    fn blocks_many(&self, phi: &Term, letters: &[usize]) -> Result<Vec<bool>> {
        letters.iter().map(|&a| self.hoare(phi, a, &Term::Bool(false))).collect()
    }
}

impl HoareOracle for Logic {
    fn hoare(&self, phi: &Term, a: usize, psi: &Term) -> Result<bool> {
        self.hoare_valid(phi, a, psi)
    }

    fn hoare_many(&self, phi: &Term, a: usize, psis: &[&Term]) -> Result<Vec<bool>> {
        Logic::hoare_many(self, phi, a, psis)
    }

    fn blocks_many(&self, phi: &Term, letters: &[usize]) -> Result<Vec<bool>> {
        Logic::blocks_many(self, phi, letters)
    }
}

/// How a determinized state takes a step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stepping {
    /// Subset construction of the assertion NFA: `ψ` follows when one member `φ` of the
    /// set has `{φ} a {ψ}`.
    Single,
    /// `ψ` follows when the conjunction of the set has `{⋀d} a {ψ}`. This is the subset
    /// construction for the NFA over all conjunctions of assertions.
    #[default]
    Conjunctive,
}

impl std::str::FromStr for Stepping {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Stepping::Single),
            "conjunctive" | "conj" => Ok(Stepping::Conjunctive),
            other => Err(format!("unknown stepping `{other}` (expected single or conjunctive)")),
        }
    }
}

/// Successors of one `(assertion, letter)` pair, valid for the first `checked` assertions.
#[derive(Clone, Debug, Default)]
struct Succ {
    checked: usize,
    targets: Vec<u32>,
    blocks: bool,
}

#[derive(Clone, Debug, Default)]
pub struct ProofAutomaton {
    assertions: Vec<Term>,
    index: HashMap<Term, u32>,
    succ: HashMap<(u32, usize), Succ>,
    dets: Vec<Vec<u32>>,
    det_index: HashMap<Vec<u32>, DetState>,
    det_delta: HashMap<(DetState, usize), DetState>,
    /// Conjunctive successors per `(det state, letter)`; survives insertions.
    conj_succ: HashMap<(DetState, usize), Succ>,
    pub stepping: Stepping,
}

#[derive(Serialize)]
struct DetDump<'a> {
    id: DetState,
    assertions: Vec<&'a str>,
}

impl ProofAutomaton {
    pub const TRUE: u32 = 0;
    pub const FALSE: u32 = 1;

    pub fn new() -> Self {
        Self::with_stepping(Stepping::default())
    }

    pub fn with_stepping(stepping: Stepping) -> Self {
        let mut p = ProofAutomaton { stepping, ..ProofAutomaton::default() };
        p.insert(Term::Bool(true));
        p.insert(Term::Bool(false));
        p.intern(vec![Self::FALSE]);
        p.intern(vec![Self::TRUE]);
        p
    }

    pub fn assertions(&self) -> &[Term] {
        &self.assertions
    }

    pub fn len(&self) -> usize {
        self.assertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty()
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.index.contains_key(t)
    }

    /// Adds an (already normalized) assertion; returns whether it is new. The NFA successor
    /// cache is kept and extended lazily; only the determinized transitions are dropped.
    pub fn insert(&mut self, t: Term) -> bool {
        if self.index.contains_key(&t) {
            return false;
        }
        let id = self.assertions.len() as u32;
        self.index.insert(t.clone(), id);
        self.assertions.push(t);
        self.det_delta.clear();
        true
    }

    pub fn insert_all(&mut self, ts: impl IntoIterator<Item = Term>) -> usize {
        ts.into_iter().filter(|t| !t.is_true() && !t.is_false()).map(|t| self.insert(t) as usize).sum()
    }

    fn intern(&mut self, set: Vec<u32>) -> DetState {
        if let Some(&d) = self.det_index.get(&set) {
            return d;
        }
        let d = self.dets.len() as DetState;
        self.dets.push(set.clone());
        self.det_index.insert(set, d);
        d
    }

    /// The determinized state `{true}`.
    pub fn initial(&self) -> DetState {
        self.det_index[&vec![Self::TRUE]]
    }

    /// Id of the absorbing accepting state.
    pub fn false_state(&self) -> DetState {
        self.det_index[&vec![Self::FALSE]]
    }

    pub fn contains_false(&self, d: DetState) -> bool {
        self.dets[d as usize].binary_search(&Self::FALSE).is_ok()
    }

    pub fn det_assertions(&self, d: DetState) -> &[u32] {
        &self.dets[d as usize]
    }

    pub fn det_states(&self) -> usize {
        self.dets.len()
    }

    /// Successor assertions of `phi` under `a` over the current assertion set.
    fn nfa_succ(&mut self, oracle: &dyn HoareOracle, phi: u32, a: usize) -> Result<(bool, &[u32])> {
        let n = self.assertions.len();
        let entry = self.succ.entry((phi, a)).or_default();
        if entry.checked < n && !entry.blocks {
            let p = &self.assertions[phi as usize];
            if entry.checked == 0 {
                entry.blocks = oracle.hoare(p, a, &Term::Bool(false))?;
                entry.checked = entry.checked.max(2);
                entry.targets = vec![Self::TRUE];
            }
            if !entry.blocks {
                let fresh: Vec<&Term> = self.assertions[entry.checked..].iter().collect();
                let ok = oracle.hoare_many(p, a, &fresh)?;
                for (i, v) in ok.into_iter().enumerate() {
                    if v {
                        entry.targets.push((entry.checked + i) as u32);
                    }
                }
                entry.checked = n;
            }
        }
        let entry = &self.succ[&(phi, a)];
        Ok((entry.blocks, &entry.targets))
    }

    /// The conjunction of the members of `d`.
    pub fn det_formula(&self, d: DetState) -> Term {
        let parts: Vec<Term> = self.dets[d as usize].iter().map(|&i| self.assertions[i as usize].clone()).collect();
        Term::and(parts)
    }

    /// Conjunctive successor entry of `(d, a)`, brought up to date with the assertion set.
    fn conj_entry(&mut self, oracle: &dyn HoareOracle, d: DetState, a: usize) -> Result<&Succ> {
        let n = self.assertions.len();
        let needs = match self.conj_succ.get(&(d, a)) {
            None => true,
            Some(e) => !e.blocks && (e.targets.is_empty() || e.checked < n),
        };
        if needs {
            let phi = self.det_formula(d);
            let mut entry = self.conj_succ.remove(&(d, a)).unwrap_or_default();
            if entry.checked == 0 {
                entry.blocks = oracle.hoare(&phi, a, &Term::Bool(false))?;
                entry.checked = 2;
            }
            if !entry.blocks {
                if entry.targets.is_empty() {
                    entry.targets.push(Self::TRUE);
                }
                let fresh: Vec<&Term> = self.assertions[entry.checked..].iter().collect();
                let ok = oracle.hoare_many(&phi, a, &fresh)?;
                for (i, v) in ok.into_iter().enumerate() {
                    if v {
                        entry.targets.push((entry.checked + i) as u32);
                    }
                }
                entry.checked = n;
            }
            self.conj_succ.insert((d, a), entry);
        }
        Ok(&self.conj_succ[&(d, a)])
    }

    /// `{ψ ∈ Π | ∃φ ∈ d. {φ} a {ψ}}` (or `{⋀d} a {ψ}` when conjunctive), memoized.
    pub fn det_step(&mut self, oracle: &dyn HoareOracle, d: DetState, a: usize) -> Result<DetState> {
        if let Some(&e) = self.det_delta.get(&(d, a)) {
            return Ok(e);
        }
        let next = if self.contains_false(d) {
            self.false_state()
        } else if self.stepping == Stepping::Conjunctive {
            let e = self.conj_entry(oracle, d, a)?;
            if e.blocks {
                self.false_state()
            } else {
                let out = e.targets.clone();
                self.intern(out)
            }
        } else {
            let mut out: Vec<u32> = Vec::new();
            let mut blocked = false;
            for phi in self.dets[d as usize].clone() {
                let (blocks, targets) = self.nfa_succ(oracle, phi, a)?;
                if blocks {
                    blocked = true;
                    break;
                }
                out.extend_from_slice(targets);
            }
            if blocked {
                self.false_state()
            } else {
                out.sort_unstable();
                out.dedup();
                self.intern(out)
            }
        };
        self.det_delta.insert((d, a), next);
        Ok(next)
    }

    /// For each letter, whether some assertion of `d` blocks it, i.e. whether the step
    /// reaches `false`. Only the blocking part of the NFA cache is computed.
    pub fn proves(&mut self, oracle: &dyn HoareOracle, d: DetState, letters: &[usize]) -> Result<Vec<bool>> {
        if self.contains_false(d) {
            return Ok(vec![true; letters.len()]);
        }
        if self.stepping == Stepping::Conjunctive {
            let missing: Vec<usize> =
                letters.iter().copied().filter(|a| !self.conj_succ.contains_key(&(d, *a))).collect();
            if !missing.is_empty() {
                let answers = oracle.blocks_many(&self.det_formula(d), &missing)?;
                for (a, blocks) in missing.into_iter().zip(answers) {
                    self.conj_succ.insert((d, a), Succ { checked: 2, targets: Vec::new(), blocks });
                }
            }
            return Ok(letters.iter().map(|a| self.conj_succ[&(d, *a)].blocks).collect());
        }
        let mut out = vec![false; letters.len()];
        for phi in self.dets[d as usize].clone() {
            let mut need = Vec::new();
            for (i, &a) in letters.iter().enumerate() {
                if out[i] {
                    continue;
                }
                match self.succ.get(&(phi, a)) {
                    Some(e) if e.checked > 0 => out[i] = e.blocks,
                    _ => need.push(i),
                }
            }
            if need.is_empty() {
                continue;
            }
            let query: Vec<usize> = need.iter().map(|&i| letters[i]).collect();
            let answers = oracle.blocks_many(&self.assertions[phi as usize], &query)?;
            for (&i, blocks) in need.iter().zip(answers) {
                self.succ.insert((phi, letters[i]), Succ { checked: 2, targets: vec![Self::TRUE], blocks });
                out[i] |= blocks;
            }
        }
        Ok(out)
    }

    /// Recomputes a step without the determinized memo (the NFA cache is still used).
    pub fn det_step_fresh(&mut self, oracle: &dyn HoareOracle, d: DetState, a: usize) -> Result<DetState> {
        let saved = self.det_delta.remove(&(d, a));
        let r = self.det_step(oracle, d, a);
        if let (Some(s), Ok(n)) = (saved, &r) {
            debug_assert_eq!(s, *n);
        }
        r
    }

    pub fn run(&mut self, oracle: &dyn HoareOracle, word: &[usize]) -> Result<DetState> {
        let mut d = self.initial();
        for &a in word {
            d = self.det_step(oracle, d, a)?;
        }
        Ok(d)
    }

    /// Membership in `L(Π)`.
    pub fn accepts(&mut self, oracle: &dyn HoareOracle, word: &[usize]) -> Result<bool> {
        let d = self.run(oracle, word)?;
        Ok(self.contains_false(d))
    }

    /// DOT rendering of the determinized states explored so far.
    pub fn to_dot(&self, letter_name: &dyn Fn(usize) -> String) -> String {
        let mut s = String::from("digraph proof {\n  rankdir=LR;\n");
        for (d, set) in self.dets.iter().enumerate() {
            let label: Vec<String> = set.iter().map(|&i| self.assertions[i as usize].pretty()).collect();
            let shape = if set.contains(&Self::FALSE) { "doublecircle" } else { "box" };
            s.push_str(&format!(
                "  d{d} [shape={shape}, label=\"{}\"];\n",
                crate::automata::dfa::escape(&label.join("\\n"))
            ));
        }
        let mut edges: Vec<_> = self.det_delta.iter().collect();
        edges.sort();
        for ((d, a), e) in edges {
            s.push_str(&format!("  d{d} -> d{e} [label=\"{}\"];\n", crate::automata::dfa::escape(&letter_name(*a))));
        }
        s.push_str("}\n");
        s
    }

    /// JSON listing of the explored determinized states.
    pub fn dump_json(&self) -> String {
        let texts: Vec<String> = self.assertions.iter().map(Term::pretty).collect();
        let dump: Vec<DetDump> = self
            .dets
            .iter()
            .enumerate()
            .map(|(d, set)| DetDump { id: d as DetState, assertions: set.iter().map(|&i| texts[i as usize].as_str()).collect() })
            .collect();
        serde_json::to_string_pretty(&dump).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `hoare(φ, a, ψ)` from a fixed table; everything else invalid.
    struct Table(Vec<(Term, usize, Term)>);

    impl HoareOracle for Table {
        fn hoare(&self, phi: &Term, a: usize, psi: &Term) -> Result<bool> {
            Ok(psi.is_true() || phi.is_false() || self.0.iter().any(|(p, b, q)| p == phi && *b == a && q == psi))
        }
    }

    #[test]
    fn false_absorbs() {
        let mut p = ProofAutomaton::new();
        let t = Table(vec![]);
        let f = p.false_state();
        assert_eq!(p.det_step(&t, f, 3).unwrap(), f);
        assert!(p.contains_false(f));
    }

    #[test]
    fn blocked_letter_reaches_false() {
        let mut p = ProofAutomaton::new();
        let t = Table(vec![(Term::Bool(true), 0, Term::Bool(false))]);
        assert!(p.accepts(&t, &[0]).unwrap());
        assert!(!p.accepts(&t, &[1]).unwrap());
    }

    #[test]
    fn insertion_extends_language_and_keeps_old_words() {
        let x = Term::var("x");
        let t = Table(vec![(Term::Bool(true), 0, x.clone()), (x.clone(), 1, Term::Bool(false))]);
        let mut p = ProofAutomaton::new();
        assert!(!p.accepts(&t, &[0, 1]).unwrap());
        assert!(p.insert(x.clone()));
        assert!(!p.insert(x));
        assert!(p.accepts(&t, &[0, 1]).unwrap());
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn conjunctive_stepping_uses_the_whole_set() {
        let (x, y) = (Term::var("x"), Term::var("y"));
        let both = Term::and([x.clone(), y.clone()]);
        let t = Table(vec![(Term::Bool(true), 0, x.clone()), (Term::Bool(true), 0, y.clone()), (both, 1, Term::Bool(false))]);
        for (stepping, proven) in [(Stepping::Single, false), (Stepping::Conjunctive, true)] {
            let mut p = ProofAutomaton::with_stepping(stepping);
            p.insert(x.clone());
            p.insert(y.clone());
            assert_eq!(p.accepts(&t, &[0, 1]).unwrap(), proven, "{stepping:?}");
            let d = p.run(&t, &[0]).unwrap();
            assert_eq!(p.proves(&t, d, &[1]).unwrap(), vec![proven]);
        }
    }
}
