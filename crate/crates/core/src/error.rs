//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong between reading a program and producing a verdict.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("semantic error at {line}:{col}: {msg}")]
    Semantic { line: usize, col: usize, msg: String },

    #[error("program automaton has more than {cap} states")]
    StateOverflow { cap: usize },

    #[error("product exploration exceeded {cap} states")]
    ProductOverflow { cap: usize },

    #[error("alphabet of {size} letters exceeds the limit of {limit}")]
    AlphabetTooLarge { size: usize, limit: usize },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("solver did not answer within {0} ms")]
    SolverTimeout(u64),

    #[error("time budget exhausted")]
    Deadline,
    #[error("interpolation failed: {0}")]
    Interpolation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
