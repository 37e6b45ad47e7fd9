//! Input language: parsing, static checks, and lowering to a program automaton.
//!
//! ```text
//! int x, y;
//! pre(x == 0 && y == 0);
//! par {
//!     thread { local int i; i := 0; while (i < 3) { x := x + 1; i := i + 1; } }
//!     thread { if (*) { y := 1; } else { assume(x > 0); } }
//! }
//! post(x == 3);
//! ```

pub mod ast;
pub mod lexer;
pub mod lower;
pub mod parser;

pub use ast::SourceProgram;
pub use lower::{
    expr_to_term, lower, lower_with, trace_of, Alphabet, LowerOptions, Program, ProgramAutomaton, Statement,
    StmtKind, ThreadGraph,
};
pub use parser::parse;

use crate::error::Result;

/// Parses and lowers source text in one step.
pub fn load(text: &str) -> Result<Program> {
    load_named("program", text)
}

pub fn load_named(name: &str, text: &str) -> Result<Program> {
    let src = parse(text)?;
    let (automaton, alphabet) = lower(&src)?;
    Ok(Program { name: name.to_string(), automaton, alphabet })
}

/// Reads and lowers a `.imp` file; the file stem becomes the program name.
pub fn load_file(path: &std::path::Path) -> Result<Program> {
    let text = std::fs::read_to_string(path)?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "program".into());
    load_named(&name, &text)
}
