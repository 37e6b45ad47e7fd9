//! Language inclusion against word enumeration, and the proof automaton against explicit
//! assertion chains.

use proptest::prelude::*;

use redver::automata::{dfa_inclusion, state_lang_inclusion, Dfa, Inclusion, InclusionTable, ProofAutomaton, Stepping};
use redver::logic::semantics::TransitionFormula;
use redver::logic::term::{Sort, Term, Vocab};
use redver::oracle::{self, FiniteLanguage, ToySystem};

fn dfa_strategy(max_states: usize, letters: usize) -> impl Strategy<Value = Dfa> {
    (1..=max_states).prop_flat_map(move |n| {
        (prop::collection::vec(any::<bool>(), n), prop::collection::vec(0..n as u32, n * letters))
            .prop_map(move |(finals, table)| Dfa::from_fn(n, letters, 0, finals, |q, a| table[q as usize * letters + a]))
    })
}

/// Every word over `letters` of length below `len`.
fn words_below(letters: usize, len: usize) -> Vec<Vec<usize>> {
    if len == 0 {
        return Vec::new();
    }
    FiniteLanguage::all_words(letters, len - 1).unwrap().words().iter().cloned().collect()
}

proptest! {
    #[test]
    fn inclusion_matches_enumeration(a in dfa_strategy(5, 2), b in dfa_strategy(5, 2)) {
        let bound = 2 * a.states * b.states;
        let expected = oracle::bounded_inclusion(&a, a.initial, &b, b.initial, bound);
        match dfa_inclusion(&a, &b) {
            Inclusion::Included => prop_assert!(expected.is_none()),
            Inclusion::Witness(w) => {
                prop_assert!(a.accepts(&w) && !b.accepts(&w));
                prop_assert_eq!(Some(w.len()), expected.map(|e| e.len()));
                // nothing shorter works
                if w.len() <= 8 {
                    for u in words_below(2, w.len()) {
                        prop_assert!(!(a.accepts(&u) && !b.accepts(&u)));
                    }
                }
            }
        }
    }

    #[test]
    fn inclusion_table_matches_pairwise_search(d in dfa_strategy(6, 3)) {
        let table = InclusionTable::compute(&d);
        for p in 0..d.states as u32 {
            for q in 0..d.states as u32 {
                let expected = oracle::bounded_inclusion(&d, p, &d, q, d.states * d.states).is_none();
                prop_assert_eq!(table.get(p as usize, q as usize), expected);
                prop_assert_eq!(state_lang_inclusion(&d, p, q), expected);
                let rooted = |r: u32| Dfa::from_fn(d.states, d.letters, r, (0..d.states as u32).map(|s| d.is_final(s)).collect(), |s, a| d.step(s, a));
                prop_assert_eq!(dfa_inclusion(&rooted(p), &rooted(q)) == Inclusion::Included, expected);
            }
        }
    }
}

fn toy() -> (ToySystem, Vec<Term>) {
    let mut v = Vocab::new();
    v.declare("x", Sort::Int);
    v.declare("y", Sort::Int);
    let (x, y) = (Term::var("x"), Term::var("y"));
    let letters = vec![
        TransitionFormula::assign("x", Term::int(0)),
        TransitionFormula::assign("y", Term::int(2)),
        TransitionFormula::assign("x", Term::add(x.clone(), Term::int(1))),
        TransitionFormula::assume(Term::ge(x.clone(), y.clone())),
    ];
    let pool = vec![
        Term::eq(x.clone(), Term::int(0)),
        Term::eq(y.clone(), Term::int(2)),
        Term::lt(x.clone(), y.clone()),
        Term::le(x.clone(), Term::int(1)),
        Term::ge(x, Term::int(1)),
    ];
    (ToySystem::new(v, letters).unwrap(), pool)
}

#[test]
fn proof_language_is_the_chain_language() {
    let (sys, pool) = toy();
    let words: Vec<Vec<usize>> = FiniteLanguage::all_words(4, 4).unwrap().words().iter().cloned().collect();
    let mut accepted = [0usize; 2];
    for mask in 0u32..1 << pool.len() {
        let chosen: Vec<Term> = (0..pool.len()).filter(|i| mask >> i & 1 == 1).map(|i| pool[i].clone()).collect();
        for (k, stepping) in [Stepping::Single, Stepping::Conjunctive].into_iter().enumerate() {
            let mut p = ProofAutomaton::with_stepping(stepping);
            for t in &chosen {
                p.insert(t.clone());
            }
            for w in &words {
                let got = p.accepts(&sys, w).unwrap();
                assert_eq!(got, oracle::chain_accepts(&sys, &chosen, w, stepping).unwrap(), "{stepping:?} {chosen:?} {w:?}");
                accepted[k] += got as usize;
            }
        }
    }
    // conjunctions only help
    assert!(accepted[1] >= accepted[0] && accepted[0] > 0, "{accepted:?}");
}

#[test]
fn single_stepping_language_is_inside_conjunctive() {
    let (sys, pool) = toy();
    let mut single = ProofAutomaton::with_stepping(Stepping::Single);
    let mut conj = ProofAutomaton::with_stepping(Stepping::Conjunctive);
    for t in &pool {
        single.insert(t.clone());
        conj.insert(t.clone());
    }
    for w in FiniteLanguage::all_words(4, 4).unwrap().words() {
        if single.accepts(&sys, w).unwrap() {
            assert!(conj.accepts(&sys, w).unwrap(), "{w:?}");
        }
    }
}
