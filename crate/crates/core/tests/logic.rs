//! Solver answers checked against explicit relations over a small state space. Every
//! statement here maps the domain {0,1,2} into itself, so a fact proven over all integers
//! must hold on the toy system.

use proptest::prelude::*;

use redver::automata::{marker_id, HoareOracle};
use redver::logic::semantics::{enumerate_states, TransitionFormula};
use redver::logic::smt::SolverConfig;
use redver::logic::term::{Sort, Term, Vocab};
use redver::logic::{Feasibility, Logic};
use redver::oracle::ToySystem;

fn vocab() -> Vocab {
    let mut v = Vocab::new();
    v.declare("x", Sort::Int);
    v.declare("y", Sort::Int);
    v
}

fn statements() -> Vec<TransitionFormula> {
    let (x, y) = (Term::var("x"), Term::var("y"));
    vec![
        TransitionFormula::assign("x", Term::int(0)),
        TransitionFormula::assign("x", Term::sub(Term::int(2), x.clone())),
        TransitionFormula::assign("y", x.clone()),
        TransitionFormula::assign("x", y.clone()),
        TransitionFormula::assign("y", Term::int(2)),
        TransitionFormula::assume(Term::lt(x.clone(), y.clone())),
        TransitionFormula::assume(Term::eq(x, Term::int(1))),
        TransitionFormula::assume(Term::not(Term::eq(y, Term::int(2)))),
    ]
}

fn assertions() -> Vec<Term> {
    let (x, y) = (Term::var("x"), Term::var("y"));
    vec![
        Term::Bool(true),
        Term::Bool(false),
        Term::eq(x.clone(), Term::int(0)),
        Term::le(x.clone(), y.clone()),
        Term::lt(x.clone(), y.clone()),
        Term::eq(y.clone(), Term::int(2)),
        Term::eq(Term::add(x.clone(), y.clone()), Term::int(2)),
        Term::and([Term::eq(x, Term::int(1)), Term::eq(y, Term::int(1))]),
    ]
}

fn setup() -> (Logic, ToySystem) {
    let logic = Logic::from_semantics(vocab(), statements(), SolverConfig::from_env());
    let toy = ToySystem::new(vocab(), statements()).unwrap();
    (logic, toy)
}

#[test]
fn proven_triples_hold_on_the_toy() {
    let (logic, toy) = setup();
    let pool = assertions();
    let refs: Vec<&Term> = pool.iter().collect();
    let mut proven = 0;
    for phi in &pool {
        for a in 0..toy.letters() {
            for (psi, ok) in pool.iter().zip(logic.hoare_many(phi, a, &refs).unwrap()) {
                if ok {
                    proven += 1;
                    assert!(toy.hoare(phi, a, psi).unwrap(), "{{{}}} {a} {{{}}}", phi.pretty(), psi.pretty());
                }
            }
        }
    }
    assert!(proven > pool.len() * toy.letters());
}

#[test]
fn proven_commutations_hold_on_the_toy() {
    let (logic, toy) = setup();
    let n = toy.letters();
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a) {
            let m = marker_id(n, a, b);
            if logic.commutes(m).unwrap() {
                assert!(toy.commutes_after(&[], a, b), "{a} {b}");
                assert!(toy.hoare(&Term::Bool(true), m, &Term::Bool(false)).unwrap());
            }
        }
    }
    // x := 0 and y := 2 touch disjoint variables
    assert!(logic.commutes(marker_id(n, 0, 4)).unwrap());
    // x := 0 followed by y := x differs from the other order
    assert!(!logic.commutes(marker_id(n, 0, 2)).unwrap());
    assert!(!toy.commutes_after(&[], 0, 2));
}

#[test]
fn composition_matches_sequential_application() {
    let sts = statements();
    let states = enumerate_states(&vocab(), &[-1, 0, 1, 2, 3]);
    for a in &sts {
        for b in &sts {
            let ab = a.then(b);
            for s in &states {
                assert_eq!(ab.apply(s), a.apply(s).and_then(|m| b.apply(&m)));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn feasibility_and_interpolants(word in prop::collection::vec(0usize..8, 1..7)) {
        let (logic, toy) = setup();
        let toy_feasible = !toy.relation(&word).is_empty();
        match logic.feasible(&word).unwrap() {
            Feasibility::Feasible(_) => {}
            Feasibility::Unknown => prop_assert!(false, "solver gave up on {:?}", word),
            Feasibility::Infeasible => {
                prop_assert!(!toy_feasible);
                let seq = logic.interpolate(&word).unwrap();
                prop_assert_eq!(seq.len(), word.len() + 1);
                prop_assert!(seq[0].is_true());
                prop_assert!(seq[word.len()].is_false());
                for (i, &a) in word.iter().enumerate() {
                    prop_assert!(toy.hoare(&seq[i], a, &seq[i + 1]).unwrap());
                }
            }
        }
    }
}
