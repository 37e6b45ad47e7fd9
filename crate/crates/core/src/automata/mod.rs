//! Finite automata: total DFAs, letter sets, and the proof automaton.

pub mod dfa;
pub mod letters;
pub mod proof;

pub use dfa::{dfa_inclusion, state_lang_inclusion, Dfa, Inclusion, InclusionTable};
pub use letters::{marker_id, LetterSet, MAX_LETTERS};
pub use proof::{DetState, HoareOracle, ProofAutomaton, Stepping};
