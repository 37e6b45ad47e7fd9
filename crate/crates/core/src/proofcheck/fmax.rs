//! The antichain transfer function `F^max` at one product state.
//!
//! `X(q, d)` holds the maximal sleep sets `R` such that, from product state `(q, d)` with
//! sleep set `R`, every reduction still contains a trace outside the proof language. A
//! child reached by `a` with sleep set `(R ∪ O(a)) ∩ I(a)` is bad when that set lies below
//! an element of the child's antichain.
//!
//! Two formulations are provided. The definitional one takes the meet over every linear
//! exploration order of the join over letters, exactly as written; it is exponential in
//! `n!` and only used for testing. The optimized one enumerates candidate sets `B` of
//! letters that must all be explored and keeps the complements `¬B` that survive.

use super::antichain::Antichain;
use crate::automata::LetterSet;
use crate::error::{Error, Result};

/// Largest alphabet accepted by the definitional form.
pub const DEFINITIONAL_LIMIT: usize = 7;

/// Everything `F^max` reads at one product state.
#[derive(Clone, Copy, Debug)]
pub struct LocalView<'a> {
    /// Alphabet size.
    pub letters: usize,
    /// Program state final and proof state not accepting.
    pub bad: bool,
    /// `X` at the `a`-successor, `None` when that successor is known to be empty (the program
    /// sink, or an accepting proof state).
    pub children: &'a [Option<&'a Antichain>],
    /// `I′(a)`, the letters that `a` may be swapped behind at this state.
    pub indep: &'a [LetterSet],
}

impl LocalView<'_> {
    fn child(&self, a: usize) -> Option<&Antichain> {
        self.children[a].filter(|c| !c.is_empty())
    }
}

/// Every linear order of `0..n`, each as the sequence of letters in exploration order.
pub fn all_orders(n: usize) -> Result<Vec<Vec<usize>>> {
    if n > DEFINITIONAL_LIMIT {
        return Err(Error::AlphabetTooLarge { size: n, limit: DEFINITIONAL_LIMIT });
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    permute(&mut cur, 0, &mut out);
    out.sort();
    Ok(out)
}

fn permute(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, out);
        v.swap(k, i);
    }
}

/// `O(a)`: letters explored strictly before `a`.
pub fn explored_before(order: &[usize], a: usize) -> LetterSet {
    LetterSet::from_iter(order.iter().copied().take_while(|&b| b != a))
}

/// `⨅_O ⨆_{a, S} S′` with `S′ = (S ∪ ¬I(a)) ∖ {a}` when `O(a) ∩ I(a) ⊆ S`.
pub fn fmax_definitional(v: &LocalView) -> Result<Antichain> {
    let n = v.letters;
    if v.bad {
        return Ok(Antichain::singleton(LetterSet::full(n)));
    }
    let mut acc: Option<Antichain> = None;
    for order in all_orders(n)? {
        let mut join = Antichain::empty();
        for a in 0..n {
            let Some(child) = v.children[a] else { continue };
            let ia = v.indep[a];
            let before = explored_before(&order, a);
            for &s in child.elements() {
                if before.inter(ia).is_subset(s) {
                    join.insert(s.union(ia.complement(n)).without(a));
                }
            }
        }
        acc = Some(match acc {
            None => join,
            Some(m) => m.meet(&join),
        });
        if acc.as_ref().is_some_and(Antichain::is_empty) {
            break;
        }
    }
    Ok(acc.unwrap_or_default())
}

/// `max {¬B | ∅ ≠ B, ∀a ∈ B. ∃S ∈ X(child_a). ¬B ∩ I′(a) ⊆ S}`.
pub fn fmax_optimized(v: &LocalView) -> Antichain {
    fmax_justified(v).0
}

/// Optimized form together with, for every element, the set `B` that produced it.
pub fn fmax_justified(v: &LocalView) -> (Antichain, Vec<(LetterSet, LetterSet)>) {
    let n = v.letters;
    let full = LetterSet::full(n);
    if v.bad {
        return (Antichain::singleton(full), vec![(full, LetterSet::EMPTY)]);
    }
    let live: Vec<usize> = (0..n).filter(|&a| v.child(a).is_some()).collect();
    let mut out = Antichain::empty();
    let mut why = Vec::new();
    // smaller B first, so the first hit of a complement is its least commitment
    let mut subsets: Vec<u32> = (1..(1u32 << live.len())).collect();
    subsets.sort_by_key(|m| (m.count_ones(), *m));
    for mask in subsets {
        let b = LetterSet::from_iter(live.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &a)| a));
        let nb = b.complement(n);
        if out.covers(nb) {
            continue;
        }
        let ok = b.iter().all(|a| {
            let need = nb.inter(v.indep[a]);
            v.child(a).is_some_and(|c| c.covers(need))
        });
        if ok {
            out.insert(nb);
            why.push((nb, b));
        }
    }
    why.retain(|(s, _)| out.elements().contains(s));
    (out, why)
}

/// The efficient side of the order-covering condition: `∃ ∅ ≠ A′ ⊆ A. ∀(a,S) ∈ A′. ¬Dom(A′) ⊆ S`.
/// Requires `a ∈ S` for every pair.
pub fn check_order_cover(pairs: &[(usize, LetterSet)], n: usize) -> Result<bool> {
    if let Some((a, _)) = pairs.iter().find(|(a, s)| !s.contains(*a)) {
        return Err(Error::Precondition(format!("pair for letter {a} does not contain it")));
    }
    let dom: Vec<usize> = {
        let mut d: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        d.sort_unstable();
        d.dedup();
        d
    };
    if dom.len() > 24 {
        return Err(Error::AlphabetTooLarge { size: dom.len(), limit: 24 });
    }
    for mask in 1u32..(1u32 << dom.len()) {
        let d = LetterSet::from_iter(dom.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &a)| a));
        let nd = d.complement(n);
        if d.iter().all(|a| pairs.iter().any(|(b, s)| *b == a && nd.is_subset(*s))) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The order-enumerating side of the order-covering condition: `∀O. ∃(a,S) ∈ A. O(a) ⊆ S`.
pub fn order_cover_by_enumeration(pairs: &[(usize, LetterSet)], n: usize) -> Result<bool> {
    Ok(all_orders(n)?.iter().all(|o| pairs.iter().any(|(a, s)| explored_before(o, *a).is_subset(*s))))
}
