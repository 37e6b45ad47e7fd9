//! Product construction and the worklist fixed point.

use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use serde::Serialize;

use super::antichain::Antichain;
use super::fmax::{fmax_justified, LocalView};
use super::Mode;
use crate::automata::{marker_id, DetState, Dfa, HoareOracle, LetterSet, ProofAutomaton};
use crate::error::{Error, Result};
use crate::independence::{filter_sound_static, maximal_contextual, maximal_static, ContextualIndependence, Relation};

/// What the fixed point needs from a proof: a deterministic automaton over program letters
/// plus the ability to tell whether a marker is blocked from a state.
pub trait ProofView {
    fn initial(&mut self) -> DetState;
    fn step(&mut self, d: DetState, a: usize) -> Result<DetState>;
    fn accepting(&self, d: DetState) -> bool;
    /// For each pair `(a, b)`, whether `indep_{a,b}` from `d` is proven infeasible.
    fn proven(&mut self, d: DetState, pairs: &[(usize, usize)]) -> Result<Vec<bool>>;
}

/// A [`ProofAutomaton`] queried through a Hoare oracle.
pub struct LiveProof<'a> {
    pub proof: &'a mut ProofAutomaton,
    pub oracle: &'a dyn HoareOracle,
    /// Number of program letters (markers are numbered after them).
    pub letters: usize,
}

impl ProofView for LiveProof<'_> {
    fn initial(&mut self) -> DetState {
        self.proof.initial()
    }

    fn step(&mut self, d: DetState, a: usize) -> Result<DetState> {
        self.proof.det_step(self.oracle, d, a)
    }

    fn accepting(&self, d: DetState) -> bool {
        self.proof.contains_false(d)
    }

    fn proven(&mut self, d: DetState, pairs: &[(usize, usize)]) -> Result<Vec<bool>> {
        let markers: Vec<usize> = pairs.iter().map(|&(a, b)| marker_id(self.letters, a, b)).collect();
        self.proof.proves(self.oracle, d, &markers)
    }
}

/// The independence information a mode draws on, computed once per program.
#[derive(Clone, Debug)]
pub struct ModeRelations {
    pub mode: Mode,
    /// For [`Mode::S`]: maximal static relation filtered by soundness.
    pub static_sound: Option<Relation>,
    /// For [`Mode::C`] and [`Mode::SC`]: the per-state labels.
    pub contextual: Option<ContextualIndependence>,
}

impl ModeRelations {
    pub fn new(mode: Mode, dfa: &Dfa, oracle: &dyn HoareOracle) -> Result<Self> {
        let mut r = ModeRelations { mode, static_sound: None, contextual: None };
        match mode {
            Mode::None => {}
            Mode::S => {
                let ci = maximal_contextual(dfa);
                r.static_sound = Some(filter_sound_static(oracle, &maximal_static(dfa, &ci))?);
            }
            Mode::C | Mode::SC => r.contextual = Some(maximal_contextual(dfa)),
        }
        Ok(r)
    }

    /// Relations given directly (used with toy proofs).
    pub fn explicit(mode: Mode, static_sound: Option<Relation>, contextual: Option<ContextualIndependence>) -> Self {
        ModeRelations { mode, static_sound, contextual }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    /// Cap on product states; exceeding it is reported as [`Error::ProductOverflow`].
    pub max_states: usize,
    /// Exploration gives up with [`Error::Deadline`] once this instant has passed.
    pub deadline: Option<Instant>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { max_states: 200_000, deadline: None }
    }
}

/// One antichain element as it was added, with the letters `B` whose exploration forced it.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Entry {
    pub set: LetterSet,
    pub stamp: u64,
    pub forced: LetterSet,
}

/// The explored product and the (possibly partial) fixed point.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub passed: bool,
    pub letters: usize,
    /// `(q, d)` per product node; node 0 is the initial one.
    pub nodes: Vec<(u32, DetState)>,
    /// Successors per node: `(letter, node)`.
    pub succ: Vec<Vec<(usize, u32)>>,
    pub bad: Vec<bool>,
    pub x: Vec<Antichain>,
    pub history: Vec<Vec<Entry>>,
    /// `I′` per node where it was needed.
    pub indep: Vec<Option<Vec<LetterSet>>>,
    /// Label pairs at the node that were candidates but not proven (contextual modes).
    pub unproven: Vec<Vec<(usize, usize)>>,
    pub evaluations: usize,
}

#[derive(Serialize)]
struct NodeDump<'a> {
    node: usize,
    program_state: u32,
    proof_state: DetState,
    sleep_sets: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
}

impl CheckResult {
    pub fn product_states(&self) -> usize {
        self.nodes.len()
    }

    pub fn child(&self, node: u32, a: usize) -> Option<u32> {
        self.succ[node as usize].iter().find(|(b, _)| *b == a).map(|(_, c)| *c)
    }

    /// JSON listing of the nonempty antichains.
    pub fn dump_json(&self) -> String {
        let rows: Vec<NodeDump> = self
            .x
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_empty())
            .map(|(i, x)| NodeDump {
                node: i,
                program_state: self.nodes[i].0,
                proof_state: self.nodes[i].1,
                sleep_sets: x.elements().iter().map(|s| s.iter().collect()).collect(),
                label: if self.bad[i] { Some("bad") } else { None },
            })
            .collect();
        serde_json::to_string_pretty(&rows).unwrap_or_default()
    }
}

fn enabled(dfa: &Dfa, sink: u32, q: u32) -> LetterSet {
    LetterSet::from_iter((0..dfa.letters).filter(|&a| dfa.step(q, a) != sink))
}

fn local_indep(
    rels: &ModeRelations,
    dfa: &Dfa,
    sink: u32,
    q: u32,
    d: DetState,
    view: &mut dyn ProofView,
) -> Result<(Vec<LetterSet>, Vec<(usize, usize)>)> {
    let n = dfa.letters;
    let en = enabled(dfa, sink, q);
    let mut rows = vec![LetterSet::EMPTY; n];
    let mut unproven = Vec::new();
    match rels.mode {
        Mode::None => {}
        Mode::S => {
            let st = rels.static_sound.as_ref().expect("static relation for mode s");
            for a in en.iter() {
                rows[a] = st.row(a).inter(en);
            }
        }
        Mode::C | Mode::SC => {
            let label = rels.contextual.as_ref().expect("contextual labels").label(q);
            let mut cand = Vec::new();
            for a in en.iter() {
                for b in label.row(a).inter(en).iter() {
                    if rels.mode == Mode::SC || label.contains(b, a) {
                        cand.push((a, b));
                    }
                }
            }
            let ok = view.proven(d, &cand)?;
            let proven: std::collections::HashSet<(usize, usize)> =
                cand.iter().zip(&ok).filter(|(_, v)| **v).map(|(p, _)| *p).collect();
            for &(a, b) in &cand {
                let both = rels.mode == Mode::SC || proven.contains(&(b, a));
                if proven.contains(&(a, b)) && both {
                    rows[a] = rows[a].with(b);
                } else if !proven.contains(&(a, b)) {
                    unproven.push((a, b));
                }
            }
        }
    }
    Ok((rows, unproven))
}

/// Least fixed point of `F^max` on the product of `dfa` and `view`, with early exit as soon
/// as the initial product state becomes nonempty.
pub fn lfp(dfa: &Dfa, sink: u32, view: &mut dyn ProofView, rels: &ModeRelations, opts: CheckOptions) -> Result<CheckResult> {
    let n = dfa.letters;
    let productive = dfa.productive();
    let d0 = view.initial();
    let mut index: HashMap<(u32, DetState), u32> = HashMap::new();
    let mut nodes = vec![(dfa.initial, d0)];
    index.insert((dfa.initial, d0), 0);
    let mut succ: Vec<Vec<(usize, u32)>> = vec![Vec::new()];
    let mut bad = vec![false];
    let mut queue = VecDeque::from([0u32]);
    let mut trivially_safe = view.accepting(d0) || !productive[dfa.initial as usize];
    if trivially_safe {
        queue.clear();
    }
    while let Some(u) = queue.pop_front() {
        if u % 256 == 0 && opts.deadline.is_some_and(|t| Instant::now() > t) {
            return Err(Error::Deadline);
        }
        let (q, d) = nodes[u as usize];
        if dfa.is_final(q) {
            bad[u as usize] = true;
            continue;
        }
        for a in 0..n {
            let q2 = dfa.step(q, a);
            if q2 == sink || !productive[q2 as usize] {
                continue;
            }
            let d2 = view.step(d, a)?;
            if view.accepting(d2) {
                continue;
            }
            let v = match index.get(&(q2, d2)) {
                Some(&v) => v,
                None => {
                    if nodes.len() >= opts.max_states {
                        return Err(Error::ProductOverflow { cap: opts.max_states });
                    }
                    let v = nodes.len() as u32;
                    index.insert((q2, d2), v);
                    nodes.push((q2, d2));
                    succ.push(Vec::new());
                    bad.push(false);
                    queue.push_back(v);
                    v
                }
            };
            succ[u as usize].push((a, v));
        }
    }
    let m = nodes.len();
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); m];
    for (u, s) in succ.iter().enumerate() {
        for &(_, v) in s {
            if !preds[v as usize].contains(&(u as u32)) {
                preds[v as usize].push(u as u32);
            }
        }
    }
    let mut res = CheckResult {
        passed: false,
        letters: n,
        nodes,
        succ,
        bad,
        x: vec![Antichain::empty(); m],
        history: vec![Vec::new(); m],
        indep: vec![None; m],
        unproven: vec![Vec::new(); m],
        evaluations: 0,
    };
    if trivially_safe {
        res.passed = true;
        return Ok(res);
    }
    let mut stamp = 0u64;
    let mut work: VecDeque<u32> = VecDeque::new();
    let mut queued = vec![false; m];
    let full = LetterSet::full(n);
    for u in 0..m {
        if res.bad[u] {
            res.x[u] = Antichain::singleton(full);
            res.history[u].push(Entry { set: full, stamp, forced: LetterSet::EMPTY });
            stamp += 1;
            for &p in &preds[u] {
                if !queued[p as usize] {
                    queued[p as usize] = true;
                    work.push_back(p);
                }
            }
        }
    }
    trivially_safe = !res.x[0].is_empty();
    if trivially_safe {
        // the initial state itself is bad
        return Ok(res);
    }
    let empty = Antichain::empty();
    while let Some(u) = work.pop_front() {
        queued[u as usize] = false;
        let ui = u as usize;
        if res.bad[ui] {
            continue;
        }
        if res.indep[ui].is_none() {
            let (q, d) = res.nodes[ui];
            let (rows, unproven) = local_indep(rels, dfa, sink, q, d, view)?;
            res.indep[ui] = Some(rows);
            res.unproven[ui] = unproven;
        }
        let mut children: Vec<Option<&Antichain>> = vec![None; n];
        for &(a, v) in &res.succ[ui] {
            children[a] = Some(&res.x[v as usize]);
        }
        for c in children.iter_mut() {
            if c.is_some_and(|x| x.is_empty()) {
                *c = Some(&empty);
            }
        }
        let rows = res.indep[ui].as_ref().unwrap();
        let view_local = LocalView { letters: n, bad: false, children: &children, indep: rows };
        let (next, why) = fmax_justified(&view_local);
        res.evaluations += 1;
        let mut grew = false;
        let mut added = Vec::new();
        for (set, forced) in why {
            if !res.x[ui].covers(set) {
                added.push(Entry { set, stamp, forced });
                stamp += 1;
                grew = true;
            }
        }
        if !grew {
            continue;
        }
        res.x[ui] = res.x[ui].join(&next);
        res.history[ui].extend(added);
        if ui == 0 {
            return Ok(res);
        }
        for &p in &preds[ui] {
            if !queued[p as usize] {
                queued[p as usize] = true;
                work.push_back(p);
            }
        }
    }
    res.passed = res.x[0].is_empty();
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A proof view that accepts exactly the words passing through a given set of
    /// "proven" letters.
    struct Blocks(LetterSet);

    impl ProofView for Blocks {
        fn initial(&mut self) -> DetState {
            0
        }
        fn step(&mut self, d: DetState, a: usize) -> Result<DetState> {
            Ok(if d == 1 || self.0.contains(a) { 1 } else { 0 })
        }
        fn accepting(&self, d: DetState) -> bool {
            d == 1
        }
        fn proven(&mut self, d: DetState, pairs: &[(usize, usize)]) -> Result<Vec<bool>> {
            Ok(vec![d == 1; pairs.len()])
        }
    }

    /// Diamond over letters 0 and 1: 0 -a-> 1 -b-> 3, 0 -b-> 2 -a-> 3, sink 4.
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
    fn plain_check_fails_without_proof() {
        let dfa = diamond();
        let rels = ModeRelations::explicit(Mode::None, None, None);
        let r = lfp(&dfa, 4, &mut Blocks(LetterSet::EMPTY), &rels, CheckOptions::default()).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn plain_check_passes_when_every_path_is_proven() {
        let dfa = diamond();
        let rels = ModeRelations::explicit(Mode::None, None, None);
        let r = lfp(&dfa, 4, &mut Blocks(LetterSet::singleton(0)), &rels, CheckOptions::default()).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn static_reduction_needs_one_interleaving() {
        // the proof only covers ab (it blocks on b after a, never on a first);
        // with (b, a) independent, ba is pruned in favour of ab
        struct OnlyAb;
        impl ProofView for OnlyAb {
            fn initial(&mut self) -> DetState {
                0
            }
            fn step(&mut self, d: DetState, a: usize) -> Result<DetState> {
                Ok(match (d, a) {
                    (3, _) => 3,
                    (0, 0) => 1,
                    (1, 1) => 3,
                    (0, 1) => 2,
                    _ => 2,
                })
            }
            fn accepting(&self, d: DetState) -> bool {
                d == 3
            }
            fn proven(&mut self, _: DetState, pairs: &[(usize, usize)]) -> Result<Vec<bool>> {
                Ok(vec![false; pairs.len()])
            }
        }
        let dfa = diamond();
        let none = ModeRelations::explicit(Mode::None, None, None);
        assert!(!lfp(&dfa, 4, &mut OnlyAb, &none, CheckOptions::default()).unwrap().passed);
        let s = ModeRelations::explicit(Mode::S, Some(Relation::from_pairs(2, [(1, 0)])), None);
        assert!(lfp(&dfa, 4, &mut OnlyAb, &s, CheckOptions::default()).unwrap().passed);
        // the other direction would keep ba instead, which the proof misses
        let s = ModeRelations::explicit(Mode::S, Some(Relation::from_pairs(2, [(0, 1)])), None);
        assert!(!lfp(&dfa, 4, &mut OnlyAb, &s, CheckOptions::default()).unwrap().passed);
    }
}
