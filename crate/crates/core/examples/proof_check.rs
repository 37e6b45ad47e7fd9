//! The refinement loop by hand: check the proof, interpolate the first infeasible
//! counterexample, repeat.
//!
//! `cargo run --example proof_check`

use std::path::PathBuf;

use redver::automata::ProofAutomaton;
use redver::cegar::{classify, refine, Classification};
use redver::logic::smt::SolverConfig;
use redver::logic::Logic;
use redver::proofcheck::{extract_counterexamples, lfp, CheckOptions, LiveProof, Mode, ModeRelations};

fn main() -> redver::Result<()> {
    let p = redver::frontend::load_file(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/fig6.imp"))?;
    let (a, aut) = (&p.alphabet, &p.automaton);
    let logic = Logic::new(a, SolverConfig::from_env());
    let rels = ModeRelations::new(Mode::SC, &aut.dfa, &logic)?;
    let mut proof = ProofAutomaton::new();
    for round in 1..=10 {
        let res = {
            let mut view = LiveProof { proof: &mut proof, oracle: &logic, letters: a.program_letters };
            lfp(&aut.dfa, aut.sink, &mut view, &rels, CheckOptions::default())?
        };
        println!("round {round}: {} product states, passed {}", res.product_states(), res.passed);
        if res.passed {
            for t in proof.assertions() {
                println!("  {}", t.pretty());
            }
            return Ok(());
        }
        let mut refined = false;
        for c in extract_counterexamples(&res, Mode::SC) {
            let (class, _) = classify(&logic, &c)?;
            println!("  {class:?}: {}", a.display_word(&c.word));
            if matches!(class, Classification::InfeasibleTrace | Classification::InfeasibleObligation) {
                println!("  {} assertions added", refine(&logic, &mut proof, &c.word)?);
                refined = true;
                break;
            }
        }
        if !refined {
            break;
        }
    }
    Ok(())
}
