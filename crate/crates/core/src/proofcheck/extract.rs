//! Counterexamples from a failed fixed point.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use super::lfp::CheckResult;
use super::Mode;
use crate::automata::{marker_id, LetterSet};

/// Cap on the number of counterexamples returned per round.
pub const MAX_COUNTEREXAMPLES: usize = 64;
/// Cap on nodes visited by the covering walk.
const MAX_VISITS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CounterexampleKind {
    ProgramTrace,
    /// A word `σ·indep_{a,b}`; the pair is given as program letters.
    SoundnessObligation(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Counterexample {
    /// Letters over the full logical alphabet; markers only in final position.
    pub word: Vec<usize>,
    pub kind: CounterexampleKind,
    /// Sleep set in force at each position of the program prefix.
    pub sleep: Vec<LetterSet>,
}

impl Counterexample {
    pub fn is_obligation(&self) -> bool {
        matches!(self.kind, CounterexampleKind::SoundnessObligation(..))
    }

    /// The program-letter prefix (the whole word for traces).
    pub fn prefix(&self) -> &[usize] {
        match self.kind {
            CounterexampleKind::ProgramTrace => &self.word,
            CounterexampleKind::SoundnessObligation(..) => &self.word[..self.word.len() - 1],
        }
    }
}

struct Walk<'a> {
    r: &'a CheckResult,
    mode: Mode,
    out: Vec<Counterexample>,
    seen: BTreeSet<(Vec<usize>, CounterexampleKind)>,
    visits: usize,
}

impl Walk<'_> {
    fn push(&mut self, word: Vec<usize>, kind: CounterexampleKind, sleep: Vec<LetterSet>) {
        if self.out.len() < MAX_COUNTEREXAMPLES && self.seen.insert((word.clone(), kind)) {
            self.out.push(Counterexample { word, kind, sleep });
        }
    }

    fn full(&self) -> bool {
        self.out.len() >= MAX_COUNTEREXAMPLES || self.visits >= MAX_VISITS
    }

    /// Walks every branch that the justification of the oldest element covering `sleep` at
    /// `node` forces.
    fn cover(&mut self, node: u32, sleep: LetterSet, prefix: &mut Vec<usize>, sleeps: &mut Vec<LetterSet>) {
        if self.full() {
            return;
        }
        self.visits += 1;
        let u = node as usize;
        if self.r.bad[u] {
            self.push(prefix.clone(), CounterexampleKind::ProgramTrace, sleeps.clone());
            return;
        }
        let Some(entry) = self.r.history[u].iter().filter(|e| sleep.is_subset(e.set)).min_by_key(|e| e.stamp).copied()
        else {
            return;
        };
        let n = self.r.letters;
        if matches!(self.mode, Mode::C | Mode::SC) {
            for &(a, b) in &self.r.unproven[u] {
                if entry.forced.contains(a) {
                    let mut w = prefix.clone();
                    w.push(marker_id(n, a, b));
                    self.push(w, CounterexampleKind::SoundnessObligation(a, b), sleeps.clone());
                }
            }
        }
        let rows = self.r.indep[u].as_ref();
        let nb = entry.forced.complement(n);
        for a in entry.forced.iter() {
            let Some(child) = self.r.child(node, a) else { continue };
            let ia = rows.map_or(LetterSet::EMPTY, |r| r[a]);
            prefix.push(a);
            sleeps.push(nb.inter(ia));
            self.cover(child, nb.inter(ia), prefix, sleeps);
            prefix.pop();
            sleeps.pop();
        }
    }
}

/// Shortest word from the initial product state to a bad one.
fn shortest_bad(r: &CheckResult) -> Option<Vec<usize>> {
    let m = r.nodes.len();
    let mut parent: Vec<Option<(u32, usize)>> = vec![None; m];
    let mut seen = vec![false; m];
    seen[0] = true;
    let mut queue = VecDeque::from([0u32]);
    while let Some(u) = queue.pop_front() {
        if r.bad[u as usize] {
            let mut word = Vec::new();
            let mut v = u;
            while let Some((p, a)) = parent[v as usize] {
                word.push(a);
                v = p;
            }
            word.reverse();
            return Some(word);
        }
        for &(a, v) in &r.succ[u as usize] {
            if !seen[v as usize] {
                seen[v as usize] = true;
                parent[v as usize] = Some((u, a));
                queue.push_back(v);
            }
        }
    }
    None
}

/// Extracts a finite set of words such that every reduction in the family (under the
/// exploration orders realizable at visited states) contains one of them. Empty when the
/// check passed.
pub fn extract_counterexamples(r: &CheckResult, mode: Mode) -> Vec<Counterexample> {
    if r.passed || r.x[0].is_empty() {
        return Vec::new();
    }
    if mode == Mode::None {
        return shortest_bad(r)
            .map(|word| {
                let sleep = vec![LetterSet::EMPTY; word.len()];
                vec![Counterexample { word, kind: CounterexampleKind::ProgramTrace, sleep }]
            })
            .unwrap_or_default();
    }
    let mut walk = Walk { r, mode, out: Vec::new(), seen: BTreeSet::new(), visits: 0 };
    walk.cover(0, LetterSet::EMPTY, &mut Vec::new(), &mut Vec::new());
    if walk.out.is_empty() {
        if let Some(word) = shortest_bad(r) {
            let sleep = vec![LetterSet::EMPTY; word.len()];
            walk.out.push(Counterexample { word, kind: CounterexampleKind::ProgramTrace, sleep });
        }
    }
    walk.out
}

#[derive(Serialize)]
struct Dump<'a> {
    word: Vec<String>,
    kind: &'a CounterexampleKind,
    sleep: Vec<Vec<String>>,
}

/// JSON rendering with letter names.
pub fn dump_json(cs: &[Counterexample], name: &dyn Fn(usize) -> String) -> String {
    let rows: Vec<Dump> = cs
        .iter()
        .map(|c| Dump {
            word: c.word.iter().map(|&a| name(a)).collect(),
            kind: &c.kind,
            sleep: c.sleep.iter().map(|s| s.iter().map(name).collect()).collect(),
        })
        .collect();
    serde_json::to_string_pretty(&rows).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{DetState, Dfa};
    use crate::error::Result;
    use crate::independence::Relation;
    use crate::proofcheck::{lfp, CheckOptions, ModeRelations, ProofView};

    struct Empty;

    impl ProofView for Empty {
        fn initial(&mut self) -> DetState {
            0
        }
        fn step(&mut self, _: DetState, _: usize) -> Result<DetState> {
            Ok(0)
        }
        fn accepting(&self, _: DetState) -> bool {
            false
        }
        fn proven(&mut self, _: DetState, pairs: &[(usize, usize)]) -> Result<Vec<bool>> {
            Ok(vec![false; pairs.len()])
        }
    }

    fn diamond() -> Dfa {
        Dfa::from_fn(5, 2, 0, vec![false, false, false, true, false], |q, a| match (q, a) {
            (0, 0) => 1,
            (0, 1) => 2,
            (1, 1) => 3,
            (2, 0) => 3,
            _ => 4,
        })
    }

    #[test]
    fn plain_mode_gives_one_shortest_trace() {
        let rels = ModeRelations::explicit(Mode::None, None, None);
        let r = lfp(&diamond(), 4, &mut Empty, &rels, CheckOptions::default()).unwrap();
        let cs = extract_counterexamples(&r, Mode::None);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].word.len(), 2);
    }

    #[test]
    fn static_mode_covers_both_orders() {
        let rels = ModeRelations::explicit(Mode::S, Some(Relation::from_pairs(2, [(0, 1), (1, 0)])), None);
        let r = lfp(&diamond(), 4, &mut Empty, &rels, CheckOptions::default()).unwrap();
        let cs = extract_counterexamples(&r, Mode::S);
        assert!(!cs.is_empty());
        assert!(cs.iter().all(|c| diamond().accepts(&c.word)));
    }

    #[test]
    fn contextual_mode_reports_obligations() {
        let dfa = diamond();
        let ci = crate::independence::maximal_contextual(&dfa);
        let rels = ModeRelations::explicit(Mode::SC, None, Some(ci));
        let r = lfp(&dfa, 4, &mut Empty, &rels, CheckOptions::default()).unwrap();
        let cs = extract_counterexamples(&r, Mode::SC);
        assert!(cs.iter().any(|c| c.is_obligation()));
        for c in cs.iter().filter(|c| c.is_obligation()) {
            assert_eq!(c.word.len(), 1);
            assert!(c.word[0] >= 2);
        }
    }
}
