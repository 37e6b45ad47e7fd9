//! `redver` verifies safety of concurrent programs with a fixed number of threads.
//!
//! The verifier looks for three things at once: a (contextual) semi-commutativity relation
//! between statements, a program reduction licensed by that relation, and a set of assertions
//! proving the reduction correct. Proofs are refined from counterexamples in a CEGAR loop, and
//! reduction coverage is decided by an antichain fixed point over the product of the program
//! automaton with the determinized proof automaton.
//!
//! The pipeline, module by module:
//!
//! - [`frontend`] parses `.imp` programs and lowers them to a [`frontend::ProgramAutomaton`].
//! - [`logic`] turns statements into transition formulas and talks to an SMT solver.
//! - [`automata`] holds DFAs, language inclusion, and the [`automata::ProofAutomaton`].
//! - [`independence`] computes maximal static and contextual semi-independence relations.
//! - [`proofcheck`] runs the antichain fixed point and extracts counterexamples.
//! - [`cegar`] drives the refinement loop and produces a [`cegar::Verdict`].
//! - [`oracle`] has brute-force reference constructions used to test everything above.
//! - [`cli`] is the command-line front end behind the `redver` binary.
//!
//! ```no_run
//! use redver::{cegar, frontend};
//!
//! let src = std::fs::read_to_string("fig1.imp").unwrap();
//! let program = frontend::load(&src).unwrap();
//! let outcome = cegar::verify(&program, &cegar::Options::default()).unwrap();
//! println!("{}", outcome.verdict);
//! ```

pub mod automata;
pub mod cegar;
pub mod cli;
pub mod error;
pub mod frontend;
pub mod independence;
pub mod logic;
pub mod oracle;
pub mod proofcheck;

pub use error::{Error, Result};
