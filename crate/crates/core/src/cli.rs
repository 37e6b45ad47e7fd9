//! Command-line front end: argument parsing, dumps, and the corpus runner.
//!
//! Exit codes: 0 safe, 1 unsafe, 2 unknown or timeout, 3 input error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::automata::Stepping;
use crate::cegar::{self, Heuristic, Outcome, Verdict};
use crate::error::{Error, Result};
use crate::frontend::{self, Program};
use crate::independence::{dump_contextual, dump_static};
use crate::logic::smt::SolverConfig;
use crate::proofcheck::{extract, Mode};

pub const EXIT_SAFE: i32 = 0;
pub const EXIT_UNSAFE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StatsFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Dump {
    Proof,
    Dot,
    Antichains,
    Relations,
    Counterexamples,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "redver", version, about = "Verify a bounded-thread concurrent program through reductions")]
pub struct Args {
    /// A `.imp` program, or a directory of them to run as a corpus.
    pub input: PathBuf,
    /// Reduction family: none, s, c or sc.
    #[arg(long, default_value = "sc")]
    pub mode: Mode,
    /// Counterexample selection: seq or int.
    #[arg(long, default_value = "int")]
    pub heuristic: Heuristic,
    /// Checking solver executable.
    #[arg(long, env = "REDVER_SOLVER", default_value = "z3")]
    pub solver: String,
    /// Arguments for the checking solver (replaces the defaults).
    #[arg(long = "solver-args", allow_hyphen_values = true, num_args = 1.., value_delimiter = ' ')]
    pub solver_args: Vec<String>,
    /// Interpolating solver executable; built-in interpolation when omitted.
    #[arg(long)]
    pub interpolator: Option<String>,
    /// Global time budget in seconds.
    #[arg(long = "timeout", default_value_t = 1200)]
    pub timeout_secs: u64,
    #[arg(long = "round-limit", default_value_t = 100)]
    pub round_limit: usize,
    /// Refine every infeasible counterexample of a round.
    #[arg(long = "refine-all")]
    pub refine_all: bool,
    /// Proof automaton stepping: single or conjunctive.
    #[arg(long, default_value = "conjunctive")]
    pub stepping: Stepping,
    /// Artifacts to write into the dump directory.
    #[arg(long, value_delimiter = ',')]
    pub dump: Vec<Dump>,
    #[arg(long = "dump-dir", default_value = "redver-dump")]
    pub dump_dir: PathBuf,
    #[arg(long, value_enum)]
    pub stats: Option<StatsFormat>,
    /// Print every refinement to standard error.
    #[arg(long, short)]
    pub verbose: bool,
    /// Corpus mode: where to write the JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

impl Args {
    pub fn options(&self) -> cegar::Options {
        cegar::Options {
            mode: self.mode,
            heuristic: self.heuristic,
            solver: SolverConfig::for_program(&self.solver, self.solver_args.clone()),
            interpolator: self.interpolator.as_ref().map(|p| SolverConfig::for_program(p, Vec::new())),
            timeout: Duration::from_secs(self.timeout_secs),
            round_limit: self.round_limit,
            refine_all: self.refine_all,
            stepping: self.stepping,
            verbose: self.verbose,
            ..cegar::Options::default()
        }
    }
}

pub fn exit_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Safe { .. } => EXIT_SAFE,
        Verdict::Unsafe { .. } => EXIT_UNSAFE,
        Verdict::Unknown { .. } => EXIT_UNKNOWN,
    }
}

/// Writes the requested artifacts of one run.
pub fn write_dumps(program: &Program, outcome: &Outcome, dumps: &[Dump], dir: &Path) -> Result<()> {
    if dumps.is_empty() {
        return Ok(());
    }
    std::fs::create_dir_all(dir)?;
    let alphabet = &program.alphabet;
    let name = |a: usize| alphabet.name(a);
    let base = &program.name;
    let art = &outcome.artifacts;
    for d in dumps {
        match d {
            Dump::Proof => std::fs::write(dir.join(format!("{base}.proof.json")), art.proof.dump_json())?,
            Dump::Dot => {
                let aut = &program.automaton;
                std::fs::write(dir.join(format!("{base}.program.dot")), aut.dfa.to_dot(base, &name, Some(aut.sink)))?;
                std::fs::write(dir.join(format!("{base}.proof.dot")), art.proof.to_dot(&name))?;
            }
            Dump::Antichains => {
                let text = art.last_check.as_ref().map(|c| c.dump_json()).unwrap_or_else(|| "[]".into());
                std::fs::write(dir.join(format!("{base}.antichains.json")), text)?;
            }
            Dump::Relations => {
                let mut text = String::new();
                if let Some(r) = &art.relations {
                    if let Some(s) = &r.static_sound {
                        text.push_str(&dump_static(s, &name));
                    }
                    if let Some(ci) = &r.contextual {
                        text.push_str(&dump_contextual(ci, &name, Some(program.automaton.sink)));
                    }
                }
                std::fs::write(dir.join(format!("{base}.relations.tsv")), text)?;
            }
            Dump::Counterexamples => {
                std::fs::write(dir.join(format!("{base}.counterexamples.json")), extract::dump_json(&art.counterexamples, &name))?;
            }
        }
    }
    Ok(())
}

/// Human-readable report of one run.
pub fn render_text(program: &Program, outcome: &Outcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", outcome.verdict.label());
    match &outcome.verdict {
        Verdict::Unsafe { trace, model, .. } => {
            let _ = writeln!(s, "trace:");
            for &a in trace {
                let _ = writeln!(s, "  {}", program.alphabet.name(a));
            }
            if !model.is_empty() {
                let vals: Vec<String> = model.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let _ = writeln!(s, "model: {}", vals.join(" "));
            }
        }
        Verdict::Unknown { reason } => {
            let _ = writeln!(s, "reason: {reason}");
        }
        Verdict::Safe { .. } => {}
    }
    s
}

pub fn render_stats_text(outcome: &Outcome) -> String {
    let m = outcome.summary();
    format!(
        "benchmark {}  mode {}  verdict {}  rounds {}  assertions {}  product states {}  solver calls {}  wall {} ms\n",
        m.benchmark, m.mode, m.verdict, m.rounds, m.assertions, m.product_states, m.solver_calls, m.wall_ms
    )
}

/// JSON lines: one per round, then the summary.
pub fn render_stats_json(outcome: &Outcome) -> String {
    let mut s = String::new();
    for r in &outcome.rounds {
        let _ = writeln!(s, "{}", serde_json::to_string(r).unwrap_or_default());
    }
    let _ = writeln!(s, "{}", serde_json::to_string(&outcome.summary()).unwrap_or_default());
    s
}

/// One corpus row.
#[derive(Clone, Debug, Serialize)]
pub struct CorpusRow {
    pub benchmark: String,
    pub verdict: String,
    pub rounds: usize,
    pub assertions: usize,
    pub wall_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CorpusSummary {
    pub rows: Vec<CorpusRow>,
    pub safe: usize,
    pub unsafe_: usize,
    pub unknown: usize,
    pub errors: usize,
}

impl CorpusSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }

    pub fn to_text(&self) -> String {
        let w = self.rows.iter().map(|r| r.benchmark.len()).max().unwrap_or(9).max(9);
        let mut s = format!("{:<w$}  {:<8}  {:>6}  {:>10}  {:>9}\n", "benchmark", "verdict", "rounds", "assertions", "wall ms");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<w$}  {:<8}  {:>6}  {:>10}  {:>9}",
                r.benchmark, r.verdict, r.rounds, r.assertions, r.wall_ms
            );
        }
        let _ = writeln!(s, "safe {}  unsafe {}  unknown {}  errors {}", self.safe, self.unsafe_, self.unknown, self.errors);
        s
    }
}

/// Verifies every `.imp` file in `dir` (not recursive), in parallel, one verifier per file.
pub fn run_corpus(dir: &Path, opts: &cegar::Options) -> Result<CorpusSummary> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "imp"))
        .collect();
    files.sort();
    let rows: Vec<CorpusRow> = files
        .par_iter()
        .map(|f| {
            let benchmark = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            match frontend::load_file(f).and_then(|p| cegar::verify(&p, opts)) {
                Ok(o) => CorpusRow {
                    benchmark,
                    verdict: o.verdict.label().to_string(),
                    rounds: o.rounds.len(),
                    assertions: o.assertions,
                    wall_ms: o.wall_ms,
                    error: None,
                },
                Err(e) => CorpusRow {
                    benchmark,
                    verdict: "ERROR".into(),
                    rounds: 0,
                    assertions: 0,
                    wall_ms: 0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let mut sum = CorpusSummary::default();
    for r in &rows {
        match r.verdict.as_str() {
            "SAFE" => sum.safe += 1,
            "UNSAFE" => sum.unsafe_ += 1,
            "UNKNOWN" => sum.unknown += 1,
            _ => sum.errors += 1,
        }
    }
    sum.rows = rows;
    Ok(sum)
}

/// Runs the command line and returns the exit code.
pub fn main_with(args: Args) -> i32 {
    let opts = args.options();
    if args.input.is_dir() {
        return match run_corpus(&args.input, &opts) {
            Ok(sum) => {
                print!("{}", sum.to_text());
                if let Some(path) = &args.report {
                    if let Err(e) = std::fs::write(path, sum.to_json()) {
                        eprintln!("error: {e}");
                        return EXIT_INPUT;
                    }
                }
                EXIT_SAFE
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INPUT
            }
        };
    }
    let program = match frontend::load_file(&args.input) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {}: {e}", args.input.display());
            return EXIT_INPUT;
        }
    };
    let outcome = match cegar::verify(&program, &opts) {
        Ok(o) => o,
        Err(e @ (Error::Precondition(_) | Error::AlphabetTooLarge { .. })) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
        Err(e) => {
            println!("UNKNOWN\nreason: {e}");
            return EXIT_UNKNOWN;
        }
    };
    print!("{}", render_text(&program, &outcome));
    match args.stats {
        Some(StatsFormat::Text) => print!("{}", render_stats_text(&outcome)),
        Some(StatsFormat::Json) => print!("{}", render_stats_json(&outcome)),
        None => {}
    }
    if let Err(e) = write_dumps(&program, &outcome, &args.dump, &args.dump_dir) {
        eprintln!("error: writing dumps: {e}");
    }
    exit_code(&outcome.verdict)
}

pub fn main_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Args::try_parse_from(argv) {
        Ok(a) => main_with(a),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_SAFE };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let a = Args::try_parse_from(["redver", "x.imp"]).unwrap();
        assert_eq!(a.mode, Mode::SC);
        assert_eq!(a.heuristic, Heuristic::Int);
        assert_eq!(a.timeout_secs, 1200);
        assert_eq!(a.round_limit, 100);
    }

    #[test]
    fn dumps_are_comma_separated() {
        let a = Args::try_parse_from(["redver", "--dump", "proof,dot", "--mode", "c", "x.imp"]).unwrap();
        assert_eq!(a.dump, vec![Dump::Proof, Dump::Dot]);
        assert_eq!(a.mode, Mode::C);
    }

    #[test]
    fn missing_file_is_an_input_error() {
        assert_eq!(main_from(["redver", "/nonexistent/p.imp"]), EXIT_INPUT);
    }

    #[test]
    fn empty_corpus_is_an_empty_table() {
        let dir = tempfile::tempdir().unwrap();
        let sum = run_corpus(dir.path(), &cegar::Options::default()).unwrap();
        assert!(sum.rows.is_empty());
        assert_eq!(main_from(["redver", dir.path().to_str().unwrap()]), EXIT_SAFE);
    }
}
