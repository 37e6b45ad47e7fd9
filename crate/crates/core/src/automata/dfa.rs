//! Total deterministic finite automata over dense letter ids.

use std::collections::VecDeque;

use serde::Serialize;

/// A total DFA. Transitions are stored row-major: `delta[q * letters + a]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Dfa {
    pub states: usize,
    pub letters: usize,
    pub delta: Vec<u32>,
    pub initial: u32,
    pub finals: Vec<bool>,
}

/// Outcome of a language inclusion check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inclusion {
    Included,
    /// A shortest word in the left language but not in the right one.
    Witness(Vec<usize>),
}

impl Dfa {
    /// Builds a DFA from a transition function.
    pub fn from_fn(states: usize, letters: usize, initial: u32, finals: Vec<bool>, f: impl Fn(u32, usize) -> u32) -> Self {
        assert_eq!(finals.len(), states);
        let mut delta = Vec::with_capacity(states * letters);
        for q in 0..states as u32 {
            for a in 0..letters {
                let t = f(q, a);
                assert!((t as usize) < states, "transition target out of range");
                delta.push(t);
            }
        }
        Dfa { states, letters, delta, initial, finals }
    }

    #[inline]
    pub fn step(&self, q: u32, a: usize) -> u32 {
        self.delta[q as usize * self.letters + a]
    }

    pub fn run(&self, from: u32, word: &[usize]) -> u32 {
        word.iter().fold(from, |q, &a| self.step(q, a))
    }

    pub fn accepts(&self, word: &[usize]) -> bool {
        self.finals[self.run(self.initial, word) as usize]
    }

    pub fn is_final(&self, q: u32) -> bool {
        self.finals[q as usize]
    }

    /// Same automaton started in `q`.
    pub fn reroot(&self, q: u32) -> Dfa {
        Dfa { initial: q, ..self.clone() }
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial as usize] = true;
        while let Some(q) = queue.pop_front() {
            for a in 0..self.letters {
                let t = self.step(q, a);
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// States from which some final state is reachable.
    pub fn productive(&self) -> Vec<bool> {
        let preds = self.predecessors();
        let mut good = self.finals.clone();
        let mut queue: VecDeque<u32> = (0..self.states as u32).filter(|q| good[*q as usize]).collect();
        while let Some(q) = queue.pop_front() {
            for a in 0..self.letters {
                for &p in &preds[a][q as usize] {
                    if !good[p as usize] {
                        good[p as usize] = true;
                        queue.push_back(p);
                    }
                }
            }
        }
        good
    }

    /// `preds[a][q]` lists the states stepping to `q` on `a`.
    pub fn predecessors(&self) -> Vec<Vec<Vec<u32>>> {
        let mut preds = vec![vec![Vec::new(); self.states]; self.letters];
        for q in 0..self.states as u32 {
            for (a, pa) in preds.iter_mut().enumerate() {
                pa[self.step(q, a) as usize].push(q);
            }
        }
        preds
    }

    /// DOT rendering with letters named by `name`.
    pub fn to_dot(&self, title: &str, name: &dyn Fn(usize) -> String, hide: Option<u32>) -> String {
        let mut out = format!("digraph \"{}\" {{\n  rankdir=LR;\n  init [shape=point];\n", escape(title));
        for q in 0..self.states as u32 {
            if Some(q) == hide {
                continue;
            }
            let shape = if self.is_final(q) { "doublecircle" } else { "circle" };
            out.push_str(&format!("  q{q} [shape={shape}];\n"));
        }
        out.push_str(&format!("  init -> q{};\n", self.initial));
        for q in 0..self.states as u32 {
            if Some(q) == hide {
                continue;
            }
            for a in 0..self.letters {
                let t = self.step(q, a);
                if Some(t) == hide {
                    continue;
                }
                out.push_str(&format!("  q{q} -> q{t} [label=\"{}\"];\n", escape(&name(a))));
            }
        }
        out.push_str("}\n");
        out
    }
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Decides `L(a) ⊆ L(b)` by breadth-first search of the product, returning a shortest
/// witness on failure.
pub fn dfa_inclusion(a: &Dfa, b: &Dfa) -> Inclusion {
    assert_eq!(a.letters, b.letters, "alphabets differ");
    let nb = b.states;
    let idx = |p: u32, q: u32| p as usize * nb + q as usize;
    let mut parent: Vec<Option<(u32, u32, usize)>> = vec![None; a.states * nb];
    let mut seen = vec![false; a.states * nb];
    let start = (a.initial, b.initial);
    seen[idx(start.0, start.1)] = true;
    let mut queue = VecDeque::from([start]);
    while let Some((p, q)) = queue.pop_front() {
        if a.is_final(p) && !b.is_final(q) {
            let mut word = Vec::new();
            let mut cur = (p, q);
            while let Some((pp, pq, l)) = parent[idx(cur.0, cur.1)] {
                word.push(l);
                cur = (pp, pq);
            }
            word.reverse();
            return Inclusion::Witness(word);
        }
        for l in 0..a.letters {
            let next = (a.step(p, l), b.step(q, l));
            let i = idx(next.0, next.1);
            if !seen[i] {
                seen[i] = true;
                parent[i] = Some((p, q, l));
                queue.push_back(next);
            }
        }
    }
    Inclusion::Included
}

/// All-pairs table of state-language inclusion: `get(p, q)` iff `L(p) ⊆ L(q)`.
#[derive(Clone, Debug)]
pub struct InclusionTable {
    n: usize,
    bits: Vec<u64>,
}

impl InclusionTable {
    /// Greatest fixpoint over the pair graph: a pair is refuted when `p` is final and `q` is
    /// not, and refutations propagate backwards along equal letters.
    pub fn compute(dfa: &Dfa) -> Self {
        let n = dfa.states;
        let mut table = InclusionTable { n, bits: vec![u64::MAX; (n * n).div_ceil(64)] };
        let preds = dfa.predecessors();
        let mut queue = VecDeque::new();
        for p in 0..n {
            for q in 0..n {
                if dfa.finals[p] && !dfa.finals[q] {
                    table.clear(p, q);
                    queue.push_back((p, q));
                }
            }
        }
        while let Some((p, q)) = queue.pop_front() {
            for pa in &preds {
                for &pp in &pa[p] {
                    for &pq in &pa[q] {
                        if table.get(pp as usize, pq as usize) {
                            table.clear(pp as usize, pq as usize);
                            queue.push_back((pp as usize, pq as usize));
                        }
                    }
                }
            }
        }
        table
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize) -> bool {
        let i = p * self.n + q;
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    fn clear(&mut self, p: usize, q: usize) {
        let i = p * self.n + q;
        self.bits[i / 64] &= !(1u64 << (i % 64));
    }
}

/// `L(q1) ⊆ L(q2)` within one automaton.
pub fn state_lang_inclusion(dfa: &Dfa, q1: u32, q2: u32) -> bool {
    InclusionTable::compute(dfa).get(q1 as usize, q2 as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Accepts exactly the listed two-letter words over {a=0, b=1}; state 4 is a sink.
    fn two_letter_words(words: &[[usize; 2]]) -> Dfa {
        // states: 0 start, 1 after a, 2 after b, 3 accept, 4 sink, 5 dead after 2 letters
        let accept = |first: usize, second: usize| words.iter().any(|w| w[0] == first && w[1] == second);
        Dfa::from_fn(6, 2, 0, vec![false, false, false, true, false, false], |q, l| match q {
            0 => 1 + l as u32,
            1 | 2 => {
                if accept(q as usize - 1, l) {
                    3
                } else {
                    4
                }
            }
            _ => 4,
        })
    }

    #[test]
    fn inclusion_of_equal_automata() {
        let a = two_letter_words(&[[0, 1], [1, 0]]);
        assert_eq!(dfa_inclusion(&a, &a), Inclusion::Included);
    }

    #[test]
    fn inclusion_witness_is_the_missing_word() {
        let a = two_letter_words(&[[0, 1], [1, 0]]);
        let b = two_letter_words(&[[0, 1]]);
        assert_eq!(dfa_inclusion(&a, &b), Inclusion::Witness(vec![1, 0]));
        assert_eq!(dfa_inclusion(&b, &a), Inclusion::Included);
    }

    #[test]
    fn state_inclusion_basics() {
        let a = two_letter_words(&[[0, 1], [1, 0], [1, 1]]);
        let t = InclusionTable::compute(&a);
        for q in 0..a.states {
            assert!(t.get(q, q));
            assert!(t.get(4, q), "sink language is empty");
        }
        // after a only b is accepted; after b both letters are
        assert!(t.get(1, 2));
        assert!(!t.get(2, 1));
        assert!(state_lang_inclusion(&a, 1, 2));
    }

    #[test]
    fn reachable_and_productive() {
        let a = two_letter_words(&[[0, 1]]);
        let r = a.reachable();
        assert!(r.iter().take(5).all(|x| *x));
        assert!(!r[5]);
        let p = a.productive();
        assert!(p[0] && p[1] && !p[2] && p[3] && !p[4]);
    }

    #[test]
    fn dot_mentions_every_visible_edge() {
        let a = two_letter_words(&[[0, 1]]);
        let dot = a.to_dot("t", &|l| ["a", "b"][l].to_string(), Some(4));
        assert!(dot.contains("q0 -> q1 [label=\"a\"]"));
        assert!(!dot.contains("q4"));
    }
}
