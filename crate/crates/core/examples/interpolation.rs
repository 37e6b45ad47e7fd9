//! Feasibility and inductive assertion sequences for a single trace.
//!
//! `cargo run --example interpolation`

use redver::logic::semantics::TransitionFormula;
use redver::logic::smt::SolverConfig;
use redver::logic::term::{Sort, Term, Vocab};
use redver::logic::Logic;

fn main() -> redver::Result<()> {
    let mut v = Vocab::new();
    v.declare("x", Sort::Int);
    v.declare("y", Sort::Int);
    let (x, y) = (Term::var("x"), Term::var("y"));
    let letters = vec![
        TransitionFormula::assume(Term::eq(x.clone(), y.clone())),
        TransitionFormula::assign("x", Term::add(x.clone(), Term::int(1))),
        TransitionFormula::assign("y", Term::add(y.clone(), Term::int(1))),
        TransitionFormula::assume(Term::not(Term::eq(x, y))),
    ];
    let logic = Logic::from_semantics(v, letters, SolverConfig::from_env());
    for word in [vec![0, 1, 2, 3], vec![0, 1, 3]] {
        println!("{word:?}: {:?}", logic.feasible(&word)?);
    }
    for (i, t) in logic.interpolate(&[0, 1, 2, 3])?.iter().enumerate() {
        println!("  φ{i} = {}", t.pretty());
    }
    Ok(())
}
