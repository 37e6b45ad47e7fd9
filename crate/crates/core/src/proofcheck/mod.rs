//! Proof checking over program reductions.
//!
//! A check succeeds when some reduction of the program in the selected family is contained
//! in the proof language. It is decided by the least fixed point of the antichain
//! transfer function over the product of the program DFA and the determinized proof, seeded
//! from bad product states (program final, proof not accepting). When the check fails, the
//! fixed point's justifications yield a finite set of counterexamples that every reduction
//! must contain one of.

pub mod antichain;
pub mod extract;
pub mod fmax;
pub mod lfp;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use antichain::Antichain;
pub use extract::{extract_counterexamples, Counterexample, CounterexampleKind};
pub use fmax::{check_order_cover, fmax_definitional, fmax_optimized, LocalView};
pub use lfp::{lfp, CheckOptions, CheckResult, LiveProof, ModeRelations, ProofView};

/// Reduction family used by the check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// No reduction: the whole program must be covered.
    None,
    /// Static semi-commutativity, filtered by soundness from every state.
    S,
    /// Contextual commutativity, symmetric pairs only, each direction proven in context.
    C,
    /// Contextual semi-commutativity: one-directional pairs proven in context (or from
    /// every state).
    SC,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::None, Mode::S, Mode::C, Mode::SC];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::None => "none",
            Mode::S => "s",
            Mode::C => "c",
            Mode::SC => "sc",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Mode::None),
            "s" => Ok(Mode::S),
            "c" => Ok(Mode::C),
            "sc" | "s+c" => Ok(Mode::SC),
            other => Err(format!("unknown mode `{other}` (expected none, s, c or sc)")),
        }
    }
}
