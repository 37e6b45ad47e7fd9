//! Brute-force reference constructions.
//!
//! Every function here is an explicit enumeration: finite languages as word sets, semi-trace
//! preorders by breadth-first search over adjacent swaps, reductions by the sleep-set
//! recursion and by the direct set comprehension, relational semantics over small explicit
//! state spaces, and an exhaustive coverage search over exploration orders. The module exists
//! to test the symbolic machinery and is exponential by design; size guards fail with
//! [`Error::Precondition`] instead of silently truncating.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use crate::automata::{marker_id, DetState, Dfa, HoareOracle, LetterSet, ProofAutomaton, Stepping};
use crate::error::{Error, Result};
use crate::frontend::{Alphabet, ProgramAutomaton};
use crate::independence::{ContextualIndependence, Relation};
use crate::logic::semantics::{enumerate_states, eval, State, TransitionFormula, Value};
use crate::logic::term::{Term, Vocab};
use crate::proofcheck::fmax::explored_before;
use crate::proofcheck::{Mode, ModeRelations, ProofView};

pub use crate::proofcheck::fmax::{all_orders, fmax_definitional};

pub type Word = Vec<usize>;

/// Largest alphabet the oracle accepts.
pub const MAX_LETTERS: usize = 16;
/// Largest number of words any enumeration may produce.
pub const MAX_WORDS: usize = 200_000;

fn guard(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(what()))
    }
}

/// Inverse of [`marker_id`]: the pair of program letters behind marker `id`.
pub fn marker_pair(n: usize, id: usize) -> Option<(usize, usize)> {
    if n < 2 || id < n || id >= n * n {
        return None;
    }
    let k = id - n;
    let (a, r) = (k / (n - 1), k % (n - 1));
    Some((a, if r >= a { r + 1 } else { r }))
}

/// An explicit set of words over `0..letters`, all of length at most `bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteLanguage {
    letters: usize,
    bound: usize,
    words: BTreeSet<Word>,
}

impl FiniteLanguage {
    pub fn new(letters: usize, bound: usize, words: impl IntoIterator<Item = Word>) -> Result<Self> {
        guard(letters <= MAX_LETTERS, || format!("oracle alphabet of {letters} letters exceeds {MAX_LETTERS}"))?;
        let words: BTreeSet<Word> = words.into_iter().collect();
        for w in &words {
            guard(w.len() <= bound, || format!("word of length {} exceeds the bound {bound}", w.len()))?;
            guard(w.iter().all(|&a| a < letters), || format!("word {w:?} leaves the alphabet"))?;
        }
        Ok(FiniteLanguage { letters, bound, words })
    }

    /// `Σ^{≤bound}`.
    pub fn all_words(letters: usize, bound: usize) -> Result<Self> {
        let total: usize = (0..=bound).map(|k| letters.saturating_pow(k as u32)).fold(0, usize::saturating_add);
        guard(total <= MAX_WORDS, || format!("Σ^≤{bound} over {letters} letters is too large"))?;
        let mut words = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..bound {
            layer = layer
                .iter()
                .flat_map(|w: &Word| (0..letters).map(move |a| [w.as_slice(), &[a]].concat()))
                .collect();
            words.extend(layer.iter().cloned());
        }
        Self::new(letters, bound, words)
    }

    /// Accepted words of length at most `bound`.
    pub fn from_dfa(dfa: &Dfa, bound: usize) -> Result<Self> {
        let productive = dfa.productive();
        let mut words = Vec::new();
        let mut stack = vec![(dfa.initial, Vec::new())];
        while let Some((q, w)) = stack.pop() {
            if !productive[q as usize] {
                continue;
            }
            if dfa.is_final(q) {
                words.push(w.clone());
                guard(words.len() <= MAX_WORDS, || "accepted language too large to enumerate".into())?;
            }
            if w.len() < bound {
                for a in 0..dfa.letters {
                    let mut w2 = w.clone();
                    w2.push(a);
                    stack.push((dfa.step(q, a), w2));
                }
            }
        }
        Self::new(dfa.letters, bound, words)
    }

    pub fn letters(&self) -> usize {
        self.letters
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn words(&self) -> &BTreeSet<Word> {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, w: &[usize]) -> bool {
        self.words.contains(w)
    }

    pub fn is_subset(&self, o: &FiniteLanguage) -> bool {
        self.words.is_subset(&o.words)
    }

    /// Every prefix of every word, the empty word included.
    pub fn prefixes(&self) -> BTreeSet<Word> {
        let mut out = BTreeSet::new();
        for w in &self.words {
            for k in 0..=w.len() {
                out.insert(w[..k].to_vec());
            }
        }
        out
    }

    pub fn is_prefix_closed(&self) -> bool {
        self.words.iter().all(|w| w.is_empty() || self.words.contains(&w[..w.len() - 1]))
    }
}

/// An independence relation, possibly depending on the prefix read so far.
#[derive(Clone, Debug)]
pub enum Indep {
    Static(Relation),
    /// The label of the state a DFA reaches on the prefix.
    Labelled { dfa: Dfa, labels: ContextualIndependence },
    /// Explicit relations for some prefixes, `default` elsewhere.
    PerPrefix { default: Relation, at: BTreeMap<Word, Relation> },
}

impl Indep {
    pub fn relation_at(&self, prefix: &[usize]) -> &Relation {
        match self {
            Indep::Static(r) => r,
            Indep::Labelled { dfa, labels } => labels.label(dfa.run(dfa.initial, prefix)),
            Indep::PerPrefix { default, at } => at.get(prefix).unwrap_or(default),
        }
    }

    pub fn contains(&self, prefix: &[usize], a: usize, b: usize) -> bool {
        self.relation_at(prefix).contains(a, b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// Words one admissible swap away from `w`. Upwards `σabρ` becomes `σbaρ` when `(a, b)` is
/// independent after `σ`; downwards is the inverse step.
fn swaps(w: &[usize], indep: &Indep, dir: Direction) -> Vec<Word> {
    let mut out = Vec::new();
    for i in 0..w.len().saturating_sub(1) {
        let (x, y) = (w[i], w[i + 1]);
        if x == y {
            continue;
        }
        let ok = match dir {
            Direction::Up => indep.contains(&w[..i], x, y),
            Direction::Down => indep.contains(&w[..i], y, x),
        };
        if ok {
            let mut v = w.to_vec();
            v.swap(i, i + 1);
            out.push(v);
        }
    }
    out
}

fn swap_reach(w: &[usize], indep: &Indep, dir: Direction) -> BTreeSet<Word> {
    let mut seen = BTreeSet::from([w.to_vec()]);
    let mut queue = VecDeque::from([w.to_vec()]);
    while let Some(u) = queue.pop_front() {
        for v in swaps(&u, indep, dir) {
            if seen.insert(v.clone()) {
                queue.push_back(v);
            }
        }
    }
    seen
}

/// `u ⊑ v`: `v` is reachable from `u` by upward swaps.
pub fn preorder_leq(u: &[usize], v: &[usize], indep: &Indep) -> bool {
    if u.len() != v.len() {
        return false;
    }
    let (mut su, mut sv) = (u.to_vec(), v.to_vec());
    su.sort_unstable();
    sv.sort_unstable();
    su == sv && swap_reach(u, indep, Direction::Up).contains(v)
}

/// Upward or downward closure; swaps preserve length, so the result is exact.
pub fn closure(l: &FiniteLanguage, indep: &Indep, dir: Direction) -> Result<FiniteLanguage> {
    let mut out = BTreeSet::new();
    for w in l.words() {
        out.extend(swap_reach(w, indep, dir));
        guard(out.len() <= MAX_WORDS, || "closure too large".into())?;
    }
    FiniteLanguage::new(l.letters, l.bound, out)
}

/// Whether every admissible upward swap of an accepted word stays accepted.
pub fn swap_closed(l: &FiniteLanguage, indep: &Indep) -> Option<(Word, Word)> {
    for w in l.words() {
        for v in swaps(w, indep, Direction::Up) {
            if !l.contains(&v) {
                return Some((w.clone(), v));
            }
        }
    }
    None
}

/// An exploration order per tree node: `order[0]` is explored first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorationOrder {
    default: Vec<usize>,
    overrides: BTreeMap<Word, Vec<usize>>,
}

fn check_order(order: &[usize], n: usize) -> Result<()> {
    let set = LetterSet::from_iter(order.iter().copied());
    guard(order.len() == n && set == LetterSet::full(n), || format!("{order:?} is not a linear order on {n} letters"))
}

impl ExplorationOrder {
    /// The same order at every node.
    pub fn uniform(order: Vec<usize>) -> Result<Self> {
        check_order(&order, order.len())?;
        Ok(ExplorationOrder { default: order, overrides: BTreeMap::new() })
    }

    /// Letters in increasing order at every node.
    pub fn identity(n: usize) -> Self {
        ExplorationOrder { default: (0..n).collect(), overrides: BTreeMap::new() }
    }

    pub fn with(mut self, node: Word, order: Vec<usize>) -> Result<Self> {
        check_order(&order, self.default.len())?;
        self.overrides.insert(node, order);
        Ok(self)
    }

    pub fn at(&self, node: &[usize]) -> &[usize] {
        self.overrides.get(node).unwrap_or(&self.default)
    }

    /// Letters explored before `a` at `node`.
    pub fn before(&self, node: &[usize], a: usize) -> LetterSet {
        explored_before(self.at(node), a)
    }

    /// Every assignment of linear orders to `nodes`, the identity elsewhere.
    pub fn enumerate(n: usize, nodes: &[Word]) -> Result<Vec<ExplorationOrder>> {
        let orders = all_orders(n)?;
        let total = orders.len().checked_pow(nodes.len() as u32).filter(|&t| t <= MAX_WORDS);
        guard(total.is_some(), || format!("{} nodes with {n}! orders each is too many", nodes.len()))?;
        let mut out = vec![ExplorationOrder::identity(n)];
        for node in nodes {
            out = out
                .into_iter()
                .flat_map(|o| orders.iter().map(move |ord| o.clone().with(node.clone(), ord.clone()).expect("valid order")))
                .collect();
        }
        Ok(out)
    }
}

/// Words of `l` the sleep-set recursion keeps:
/// `sleep(σa) = (sleep(σ) ∪ O(σ)(a)) ∩ I(σ)(a)` and `σa` is ignored once `a ∈ sleep(σ)`.
pub fn enumerate_reduction(l: &FiniteLanguage, indep: &Indep, order: &ExplorationOrder) -> Result<FiniteLanguage> {
    let prefixes = l.prefixes();
    let mut kept = BTreeSet::new();
    let mut stack: Vec<(Word, LetterSet)> = vec![(Vec::new(), LetterSet::EMPTY)];
    while let Some((sigma, sleep)) = stack.pop() {
        if l.contains(&sigma) {
            kept.insert(sigma.clone());
        }
        for a in 0..l.letters {
            if sleep.contains(a) {
                continue;
            }
            let mut child = sigma.clone();
            child.push(a);
            if !prefixes.contains(&child) {
                continue;
            }
            let s = sleep.union(order.before(&sigma, a)).inter(indep.relation_at(&sigma).row(a));
            stack.push((child, s));
        }
    }
    FiniteLanguage::new(l.letters, l.bound, kept)
}

/// Whether `w` is pruned by the set comprehension: `w = ρ a σ b τ` with `b` explored before
/// `a` at `ρ` and `(c, b)` independent after the prefix preceding each letter `c` of `aσ`.
pub fn pruned_by_formula(w: &[usize], indep: &Indep, order: &ExplorationOrder) -> bool {
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            let b = w[j];
            if order.before(&w[..i], w[i]).contains(b) && (i..j).all(|k| indep.contains(&w[..k], w[k], b)) {
                return true;
            }
        }
    }
    false
}

/// The reduction as the direct set comprehension over `l`.
pub fn reduction_by_formula(l: &FiniteLanguage, indep: &Indep, order: &ExplorationOrder) -> Result<FiniteLanguage> {
    let kept = l.words().iter().filter(|w| !pruned_by_formula(w, indep, order)).cloned();
    FiniteLanguage::new(l.letters, l.bound, kept)
}

/// `{σ · indep_{a,b} | (a, b) ∈ I(σ)}` over the given prefixes, markers numbered after the
/// `n` program letters.
pub fn sound_obligations(prefixes: &BTreeSet<Word>, indep: &Indep, n: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for sigma in prefixes {
        for (a, b) in indep.relation_at(sigma).pairs() {
            let mut w = sigma.clone();
            w.push(marker_id(n, a, b));
            out.push(w);
        }
    }
    out
}

/// Shuffles of per-thread complete paths, bracketed by the pre and negated post letters,
/// of total length at most `bound`. Independent of the product construction.
pub fn interleavings(aut: &ProgramAutomaton, alphabet: &Alphabet, bound: usize) -> Result<FiniteLanguage> {
    let inner = bound.saturating_sub(2);
    let mut per_thread: Vec<Vec<Word>> = Vec::new();
    for g in &aut.thread_graphs {
        let mut paths = Vec::new();
        let mut stack = vec![(0usize, Vec::new())];
        while let Some((loc, w)) = stack.pop() {
            if loc == g.exit {
                paths.push(w.clone());
            }
            if w.len() < inner {
                for &(l, to) in &g.out[loc] {
                    let mut w2 = w.clone();
                    w2.push(l);
                    stack.push((to, w2));
                }
            }
            guard(paths.len() + stack.len() <= MAX_WORDS, || "thread paths too many".into())?;
        }
        per_thread.push(paths);
    }
    let mut words = BTreeSet::new();
    if bound >= 2 {
        let mut choice = vec![0usize; per_thread.len()];
        'outer: loop {
            if per_thread.iter().all(|p| !p.is_empty()) {
                let picked: Vec<&Word> = choice.iter().zip(&per_thread).map(|(&i, p)| &p[i]).collect();
                if picked.iter().map(|w| w.len()).sum::<usize>() <= inner {
                    let mut w = vec![alphabet.pre_letter];
                    shuffle(&picked, &mut vec![0; picked.len()], &mut w, &mut |u| {
                        let mut u = u.to_vec();
                        u.push(alphabet.post_letter);
                        words.insert(u);
                    });
                    guard(words.len() <= MAX_WORDS, || "interleavings too many".into())?;
                }
            } else {
                break;
            }
            for t in 0..choice.len() {
                choice[t] += 1;
                if choice[t] < per_thread[t].len() {
                    continue 'outer;
                }
                choice[t] = 0;
            }
            break;
        }
    }
    FiniteLanguage::new(alphabet.program_letters, bound, words)
}

fn shuffle(parts: &[&Word], at: &mut Vec<usize>, cur: &mut Word, emit: &mut dyn FnMut(&[usize])) {
    let mut done = true;
    for t in 0..parts.len() {
        if at[t] < parts[t].len() {
            done = false;
            cur.push(parts[t][at[t]]);
            at[t] += 1;
            shuffle(parts, at, cur, emit);
            at[t] -= 1;
            cur.pop();
        }
    }
    if done {
        emit(cur);
    }
}

/// A shortest word of length at most `bound` accepted from `qa` in `a` but not from `qb`
/// in `b`, by breadth-first search over state pairs.
pub fn bounded_inclusion(a: &Dfa, qa: u32, b: &Dfa, qb: u32, bound: usize) -> Option<Word> {
    let mut seen = HashSet::from([(qa, qb)]);
    let mut queue = VecDeque::from([(qa, qb, Vec::new())]);
    while let Some((p, q, w)) = queue.pop_front() {
        if a.is_final(p) && !b.is_final(q) {
            return Some(w);
        }
        if w.len() == bound {
            continue;
        }
        for l in 0..a.letters {
            let next = (a.step(p, l), b.step(q, l));
            if seen.insert(next) {
                let mut w2 = w.clone();
                w2.push(l);
                queue.push_back((next.0, next.1, w2));
            }
        }
    }
    None
}

/// `{(a, b) | a ≠ b, L(q·ab) ⊆ L(q·ba)}` with inclusion checked up to `bound`.
pub fn label_by_enumeration(dfa: &Dfa, q: u32, bound: usize) -> Relation {
    let n = dfa.letters;
    let mut r = Relation::empty(n);
    for a in 0..n {
        for b in 0..n {
            if a != b && bounded_inclusion(dfa, dfa.run(q, &[a, b]), dfa, dfa.run(q, &[b, a]), bound).is_none() {
                r.insert(a, b);
            }
        }
    }
    r
}

/// Pairs admissible after every reachable prefix, each inclusion checked up to `bound`.
pub fn static_by_enumeration(dfa: &Dfa, bound: usize) -> Relation {
    let mut seen = HashSet::from([dfa.initial]);
    let mut queue = VecDeque::from([dfa.initial]);
    let mut r = Relation::full(dfa.letters);
    for a in 0..dfa.letters {
        r.remove(a, a);
    }
    while let Some(q) = queue.pop_front() {
        r = r.inter(&label_by_enumeration(dfa, q, bound));
        for a in 0..dfa.letters {
            let q2 = dfa.step(q, a);
            if seen.insert(q2) {
                queue.push_back(q2);
            }
        }
    }
    r
}

/// A deterministic relational semantics over an explicit finite state space. Program letters
/// are transition formulas; a step whose result leaves the space is blocked. Markers
/// `indep_{a,b}` denote `⟦ab⟧ \ ⟦ba⟧` computed on the same space.
#[derive(Clone, Debug)]
pub struct ToySystem {
    pub vocab: Vocab,
    pub states: Vec<State>,
    index: HashMap<State, usize>,
    letters: Vec<TransitionFormula>,
}

/// The values integer variables range over in toy systems.
pub const TOY_DOMAIN: [i64; 3] = [0, 1, 2];

impl ToySystem {
    pub fn new(vocab: Vocab, letters: Vec<TransitionFormula>) -> Result<Self> {
        Self::with_domain(vocab, letters, &TOY_DOMAIN)
    }

    pub fn with_domain(vocab: Vocab, letters: Vec<TransitionFormula>, domain: &[i64]) -> Result<Self> {
        guard(letters.len() <= MAX_LETTERS, || format!("{} toy letters exceed {MAX_LETTERS}", letters.len()))?;
        let states = enumerate_states(&vocab, domain);
        guard(states.len() <= 4096, || format!("toy state space of {} states is too large", states.len()))?;
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(ToySystem { vocab, states, index, letters })
    }

    /// Number of program letters.
    pub fn letters(&self) -> usize {
        self.letters.len()
    }

    pub fn program_step(&self, s: usize, a: usize) -> Option<usize> {
        let t = self.letters[a].apply(&self.states[s])?;
        self.index.get(&t).copied()
    }

    /// Successor of state `s` under any letter, markers included.
    pub fn step(&self, s: usize, a: usize) -> Option<usize> {
        let n = self.letters();
        if a < n {
            return self.program_step(s, a);
        }
        let (x, y) = marker_pair(n, a)?;
        let ab = self.program_step(s, x).and_then(|m| self.program_step(m, y))?;
        let ba = self.program_step(s, y).and_then(|m| self.program_step(m, x));
        (ba != Some(ab)).then_some(ab)
    }

    pub fn run(&self, s: usize, word: &[usize]) -> Option<usize> {
        word.iter().try_fold(s, |s, &a| self.step(s, a))
    }

    /// `⟦w⟧` as explicit pairs, composed letter by letter.
    pub fn relation(&self, word: &[usize]) -> BTreeSet<(usize, usize)> {
        let mut rel: BTreeSet<(usize, usize)> = (0..self.states.len()).map(|s| (s, s)).collect();
        for &a in word {
            rel = rel.into_iter().filter_map(|(s, m)| self.step(m, a).map(|t| (s, t))).collect();
        }
        rel
    }

    /// `⟦σab⟧ ⊆ ⟦σba⟧` on explicit relations.
    pub fn commutes_after(&self, sigma: &[usize], a: usize, b: usize) -> bool {
        let ab = self.relation(&[sigma, &[a, b]].concat());
        let ba = self.relation(&[sigma, &[b, a]].concat());
        ab.is_subset(&ba)
    }

    fn holds(&self, t: &Term, s: usize) -> bool {
        eval(t, &self.states[s]) == Some(Value::Bool(true))
    }

    /// States satisfying `t`.
    pub fn models(&self, t: &Term) -> Vec<usize> {
        (0..self.states.len()).filter(|&s| self.holds(t, s)).collect()
    }
}

impl HoareOracle for ToySystem {
    fn hoare(&self, phi: &Term, a: usize, psi: &Term) -> Result<bool> {
        Ok((0..self.states.len())
            .filter(|&s| self.holds(phi, s))
            .all(|s| self.step(s, a).is_none_or(|t| self.holds(psi, t))))
    }
}

/// Whether `word` is proven by `assertions` through an explicit chain
/// `true = φ_0, …, φ_n ∋ false` with every `{φ_i} w_i {φ_{i+1}}` valid. With
/// [`Stepping::Conjunctive`] the `φ_i` range over conjunctions of subsets.
pub fn chain_accepts(oracle: &dyn HoareOracle, assertions: &[Term], word: &[usize], stepping: Stepping) -> Result<bool> {
    let mut pool: Vec<Term> = vec![Term::Bool(true), Term::Bool(false)];
    for t in assertions {
        if !pool.contains(t) {
            pool.push(t.clone());
        }
    }
    let nodes: Vec<Term> = match stepping {
        Stepping::Single => pool,
        Stepping::Conjunctive => {
            guard(pool.len() <= 12, || "too many assertions for a conjunctive chain search".into())?;
            (0u32..1 << pool.len())
                .map(|mask| Term::and((0..pool.len()).filter(|i| mask >> i & 1 == 1).map(|i| pool[i].clone())))
                .collect()
        }
    };
    let mut reach: Vec<bool> = nodes.iter().map(|t| t.is_true()).collect();
    for &a in word {
        let mut next = vec![false; nodes.len()];
        for (i, phi) in nodes.iter().enumerate() {
            if reach[i] {
                for (j, psi) in nodes.iter().enumerate() {
                    if !next[j] && oracle.hoare(phi, a, psi)? {
                        next[j] = true;
                    }
                }
            }
        }
        reach = next;
    }
    Ok(nodes.iter().zip(&reach).any(|(t, &r)| r && t.is_false()))
}

/// `I_Π(σ) = {(a, b) | σ · indep_{a,b} ∈ L(Π)}` for the `n` program letters.
pub fn proof_induced(proof: &mut ProofAutomaton, oracle: &dyn HoareOracle, sigma: &[usize], n: usize) -> Result<Relation> {
    let d = proof.run(oracle, sigma)?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    let markers: Vec<usize> = pairs.iter().map(|&(a, b)| marker_id(n, a, b)).collect();
    let ok = proof.proves(oracle, d, &markers)?;
    Ok(Relation::from_pairs(n, pairs.into_iter().zip(ok).filter(|(_, v)| *v).map(|(p, _)| p)))
}

/// A proof given as an explicit table: transitions, accepting states, and the proven
/// commutation pairs per state.
#[derive(Clone, Debug)]
pub struct TableProof {
    pub delta: Vec<Vec<DetState>>,
    pub accepting: Vec<bool>,
    pub proven: Vec<HashSet<(usize, usize)>>,
}

impl ProofView for TableProof {
    fn initial(&mut self) -> DetState {
        0
    }

    fn step(&mut self, d: DetState, a: usize) -> Result<DetState> {
        Ok(self.delta[d as usize][a])
    }

    fn accepting(&self, d: DetState) -> bool {
        self.accepting[d as usize]
    }

    fn proven(&mut self, d: DetState, pairs: &[(usize, usize)]) -> Result<Vec<bool>> {
        Ok(pairs.iter().map(|p| self.proven[d as usize].contains(p)).collect())
    }
}

/// Coverage by exhaustive search: whether some exploration order and some certified
/// independence relation yield a reduction of the (finite) program language whose every
/// word is proven by `view`.
///
/// Certified pairs at a node mirror the mode: nothing for [`Mode::None`]; a subset of the
/// static relation chosen once for the whole tree in [`Mode::S`]; pairs of the node's label
/// whose obligations the proof state discharges in [`Mode::SC`], with both directions
/// required in [`Mode::C`]. In all modes both letters must be enabled at the node. For the
/// per-node modes the search over subsets is done row by row: each child only depends on
/// the row of its own letter.
pub fn covered(dfa: &Dfa, sink: u32, view: &mut dyn ProofView, rels: &ModeRelations) -> Result<bool> {
    let n = dfa.letters;
    guard(n <= MAX_LETTERS, || format!("oracle alphabet of {n} letters exceeds {MAX_LETTERS}"))?;
    let orders = all_orders(n)?;
    match rels.mode {
        Mode::S => {
            let st = rels.static_sound.as_ref().ok_or_else(|| Error::Precondition("mode s needs a static relation".into()))?;
            let pairs: Vec<(usize, usize)> = st.pairs().collect();
            guard(pairs.len() <= 12, || "static relation too large for subset search".into())?;
            for mask in 0u32..1 << pairs.len() {
                let sub = Relation::from_pairs(n, (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]));
                let mut search = Coverage::new(dfa, sink, rels, &orders, Some(sub));
                let d0 = view.initial();
                if search.node(view, dfa.initial, d0, LetterSet::EMPTY)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        _ => {
            let mut search = Coverage::new(dfa, sink, rels, &orders, None);
            let d0 = view.initial();
            search.node(view, dfa.initial, d0, LetterSet::EMPTY)
        }
    }
}

struct Coverage<'a> {
    dfa: &'a Dfa,
    sink: u32,
    rels: &'a ModeRelations,
    orders: &'a [Vec<usize>],
    fixed: Option<Relation>,
    productive: Vec<bool>,
    memo: HashMap<(u32, DetState, LetterSet), bool>,
    open: HashSet<(u32, DetState, LetterSet)>,
}

impl<'a> Coverage<'a> {
    fn new(dfa: &'a Dfa, sink: u32, rels: &'a ModeRelations, orders: &'a [Vec<usize>], fixed: Option<Relation>) -> Self {
        let productive = dfa.productive();
        Coverage { dfa, sink, rels, orders, fixed, productive, memo: HashMap::new(), open: HashSet::new() }
    }

    /// Certified row of each enabled letter.
    fn certified(&self, view: &mut dyn ProofView, q: u32, d: DetState, en: LetterSet) -> Result<Vec<LetterSet>> {
        let n = self.dfa.letters;
        let mut rows = vec![LetterSet::EMPTY; n];
        match self.rels.mode {
            Mode::None => {}
            Mode::S => {
                let st = self.fixed.as_ref().expect("fixed static subset");
                for a in en.iter() {
                    rows[a] = st.row(a).inter(en);
                }
            }
            Mode::C | Mode::SC => {
                let label = self.rels.contextual.as_ref().expect("contextual labels").label(q);
                let cand: Vec<(usize, usize)> =
                    en.iter().flat_map(|a| label.row(a).inter(en).iter().map(move |b| (a, b))).collect();
                let ok = view.proven(d, &cand)?;
                let proven: HashSet<(usize, usize)> = cand.iter().zip(ok).filter(|(_, v)| *v).map(|(p, _)| *p).collect();
                for &(a, b) in &proven {
                    if self.rels.mode == Mode::SC || proven.contains(&(b, a)) {
                        rows[a] = rows[a].with(b);
                    }
                }
            }
        }
        Ok(rows)
    }

    fn node(&mut self, view: &mut dyn ProofView, q: u32, d: DetState, sleep: LetterSet) -> Result<bool> {
        if view.accepting(d) || !self.productive[q as usize] {
            return Ok(true);
        }
        if self.dfa.is_final(q) {
            return Ok(false);
        }
        let key = (q, d, sleep);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        guard(self.open.insert(key), || "coverage search needs an acyclic program".into())?;
        let n = self.dfa.letters;
        let en = LetterSet::from_iter((0..n).filter(|&a| self.dfa.step(q, a) != self.sink));
        let rows = self.certified(view, q, d, en)?;
        let mut result = false;
        for order in self.orders {
            let mut all = true;
            for a in en.iter() {
                if sleep.contains(a) {
                    continue;
                }
                let (q2, d2) = (self.dfa.step(q, a), view.step(d, a)?);
                let awake = sleep.union(explored_before(order, a));
                let mut some = false;
                // every subset of the certified row, largest first
                let row = rows[a];
                let elems: Vec<usize> = row.iter().collect();
                for mask in (0u32..1 << elems.len()).rev() {
                    let sub = LetterSet::from_iter((0..elems.len()).filter(|i| mask >> i & 1 == 1).map(|i| elems[i]));
                    if self.node(view, q2, d2, awake.inter(sub))? {
                        some = true;
                        break;
                    }
                }
                if !some {
                    all = false;
                    break;
                }
            }
            if all {
                result = true;
                break;
            }
        }
        self.open.remove(&key);
        self.memo.insert(key, result);
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig6() -> (FiniteLanguage, Indep) {
        // a ∥ bcd with letters a=0, b=1, c=2, d=3
        let words = [vec![0, 1, 2, 3], vec![1, 0, 2, 3], vec![1, 2, 0, 3], vec![1, 2, 3, 0]];
        let l = FiniteLanguage::new(4, 4, words).unwrap();
        (l, Indep::Static(Relation::from_pairs(4, [(1, 0), (3, 0)])))
    }

    #[test]
    fn marker_pair_inverts_marker_id() {
        for n in 2..6 {
            for a in 0..n {
                for b in (0..n).filter(|&b| b != a) {
                    assert_eq!(marker_pair(n, marker_id(n, a, b)), Some((a, b)));
                }
            }
        }
    }

    #[test]
    fn preorder_on_fig6() {
        let (_, i) = fig6();
        assert!(preorder_leq(&[1, 0, 2, 3], &[0, 1, 2, 3], &i));
        assert!(!preorder_leq(&[0, 1, 2, 3], &[1, 0, 2, 3], &i));
        assert!(preorder_leq(&[1, 2, 3, 0], &[1, 2, 0, 3], &i));
        assert!(preorder_leq(&[2, 1], &[2, 1], &i));
    }

    #[test]
    fn fig6_trees() {
        let (l, i) = fig6();
        let ii = enumerate_reduction(&l, &i, &ExplorationOrder::identity(4)).unwrap();
        assert_eq!(ii.words(), &BTreeSet::from([vec![0, 1, 2, 3], vec![1, 2, 0, 3]]));
        let right_first = ExplorationOrder::identity(4).with(vec![], vec![1, 0, 2, 3]).unwrap();
        let iii = enumerate_reduction(&l, &i, &right_first).unwrap();
        assert_eq!(iii.words(), &BTreeSet::from([vec![0, 1, 2, 3], vec![1, 0, 2, 3], vec![1, 2, 0, 3]]));
        assert_eq!(reduction_by_formula(&l, &i, &right_first).unwrap(), iii);
    }

    #[test]
    fn closures_preserve_length() {
        let (l, i) = fig6();
        let up = closure(&l, &i, Direction::Up).unwrap();
        let down = closure(&l, &i, Direction::Down).unwrap();
        assert!(l.is_subset(&up) && l.is_subset(&down));
        assert!(up.words().iter().chain(down.words()).all(|w| w.len() == 4));
    }

    #[test]
    fn empty_relation_keeps_everything() {
        let (l, _) = fig6();
        let none = Indep::Static(Relation::empty(4));
        assert_eq!(enumerate_reduction(&l, &none, &ExplorationOrder::identity(4)).unwrap(), l);
    }

    #[test]
    fn all_words_counts() {
        assert_eq!(FiniteLanguage::all_words(2, 3).unwrap().len(), 15);
        assert!(FiniteLanguage::all_words(2, 3).unwrap().is_prefix_closed());
        assert!(FiniteLanguage::all_words(8, 12).is_err());
    }

    #[test]
    fn toy_markers_are_commutation_failures() {
        let mut v = Vocab::new();
        v.declare("x", crate::logic::term::Sort::Int);
        let inc = TransitionFormula::assign("x", Term::add(Term::var("x"), Term::int(1)));
        let zero = TransitionFormula::assign("x", Term::int(0));
        let sys = ToySystem::new(v, vec![inc, zero]).unwrap();
        // x := x+1 ; x := 0 ends in 0, the other order in 1
        assert!(!sys.commutes_after(&[], 0, 1));
        assert!(!sys.hoare(&Term::Bool(true), marker_id(2, 0, 1), &Term::Bool(false)).unwrap());
        // from x = 2 the increment blocks (leaves the space), so the marker does too
        let x2 = Term::eq(Term::var("x"), Term::int(2));
        assert!(sys.hoare(&x2, marker_id(2, 0, 1), &Term::Bool(false)).unwrap());
    }
}
