//! Sleep-set reductions of explicit finite languages.

use std::collections::BTreeMap;

use proptest::prelude::*;

use redver::automata::Dfa;
use redver::independence::{maximal_contextual, Relation};
use redver::oracle::{self, Direction, ExplorationOrder, FiniteLanguage, Indep};

const LETTERS: usize = 3;

fn relation() -> impl Strategy<Value = Relation> {
    prop::collection::vec(any::<bool>(), LETTERS * LETTERS).prop_map(|bits| {
        let pairs = (0..LETTERS).flat_map(|a| (0..LETTERS).map(move |b| (a, b)));
        Relation::from_pairs(LETTERS, pairs.zip(bits).filter(|&((a, b), on)| on && a != b).map(|(p, _)| p))
    })
}

fn word(max: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..LETTERS, 0..=max)
}

fn language() -> impl Strategy<Value = FiniteLanguage> {
    prop::collection::btree_set(word(4), 0..40).prop_map(|ws| FiniteLanguage::new(LETTERS, 4, ws).unwrap())
}

fn indep() -> impl Strategy<Value = Indep> {
    prop_oneof![
        relation().prop_map(Indep::Static),
        (relation(), prop::collection::btree_map(word(3), relation(), 0..12))
            .prop_map(|(default, at)| Indep::PerPrefix { default, at }),
    ]
}

fn order() -> impl Strategy<Value = ExplorationOrder> {
    let perm = Just((0..LETTERS).collect::<Vec<_>>()).prop_shuffle();
    (perm.clone(), prop::collection::vec((word(3), perm), 0..6)).prop_map(|(base, nodes)| {
        nodes.into_iter().fold(ExplorationOrder::uniform(base).unwrap(), |o, (n, p)| o.with(n, p).unwrap())
    })
}

fn dfa() -> impl Strategy<Value = Dfa> {
    (1..=4usize).prop_flat_map(|n| {
        (prop::collection::vec(any::<bool>(), n), prop::collection::vec(0..n as u32, n * LETTERS))
            .prop_map(move |(finals, table)| Dfa::from_fn(n, LETTERS, 0, finals, |q, a| table[q as usize * LETTERS + a]))
    })
}

proptest! {
    #[test]
    fn recursion_matches_formula(l in language(), i in indep(), o in order()) {
        let rec = oracle::enumerate_reduction(&l, &i, &o).unwrap();
        let set = oracle::reduction_by_formula(&l, &i, &o).unwrap();
        prop_assert_eq!(&rec, &set);
        prop_assert!(rec.is_subset(&l));
    }

    /// A swap-closed language is covered by the words its reduction can be swapped down from.
    #[test]
    fn reduction_represents_a_closed_language(d in dfa(), o in order()) {
        let l = FiniteLanguage::from_dfa(&d, 5).unwrap();
        let i = Indep::Labelled { dfa: d.clone(), labels: maximal_contextual(&d) };
        prop_assert_eq!(oracle::swap_closed(&l, &i), None);
        let red = oracle::enumerate_reduction(&l, &i, &o).unwrap();
        let covered = oracle::closure(&red, &i, Direction::Down).unwrap();
        prop_assert!(l.is_subset(&covered));
        // every word has a representative above it
        for w in l.words() {
            prop_assert!(red.words().iter().any(|r| oracle::preorder_leq(w, r, &i)));
        }
    }

    #[test]
    fn larger_relations_prune_more(l in language(), small in relation(), extra in relation(), o in order()) {
        let mut big = small.clone();
        for (a, b) in extra.pairs() {
            big.insert(a, b);
        }
        let r_small = oracle::enumerate_reduction(&l, &Indep::Static(small), &o).unwrap();
        let r_big = oracle::enumerate_reduction(&l, &Indep::Static(big), &o).unwrap();
        prop_assert!(r_big.is_subset(&r_small));
    }

    /// Obligations enumerate one marker word per independent pair at each prefix.
    #[test]
    fn obligations_follow_the_relation(i in indep(), ws in prop::collection::btree_set(word(3), 0..10)) {
        let obligations = oracle::sound_obligations(&ws, &i, LETTERS);
        let expected: usize = ws.iter().map(|w| i.relation_at(w).len()).sum();
        prop_assert_eq!(obligations.len(), expected);
        for o in &obligations {
            let (sigma, m) = o.split_at(o.len() - 1);
            let (a, b) = oracle::marker_pair(LETTERS, m[0]).unwrap();
            prop_assert!(ws.contains(sigma) && i.contains(sigma, a, b));
        }
    }
}

#[test]
fn empty_relation_keeps_everything() {
    let l = FiniteLanguage::all_words(LETTERS, 4).unwrap();
    let i = Indep::PerPrefix { default: Relation::empty(LETTERS), at: BTreeMap::new() };
    let red = oracle::enumerate_reduction(&l, &i, &ExplorationOrder::identity(LETTERS)).unwrap();
    assert_eq!(red, l);
}

#[test]
fn full_commutation_keeps_one_word_per_multiset() {
    let l = FiniteLanguage::all_words(LETTERS, 4).unwrap();
    let full = Relation::from_pairs(LETTERS, (0..LETTERS).flat_map(|a| (0..LETTERS).filter(move |&b| b != a).map(move |b| (a, b))));
    let red = oracle::enumerate_reduction(&l, &Indep::Static(full), &ExplorationOrder::identity(LETTERS)).unwrap();
    for w in red.words() {
        assert!(w.windows(2).all(|p| p[0] <= p[1]), "{w:?}");
    }
    // multisets of size at most 4 over 3 letters
    assert_eq!(red.len(), 1 + 3 + 6 + 10 + 15);
}
