//! SMT-LIB v2 over a child process's standard input and output.
//!
//! Every query runs inside `(push 1)`/`(pop 1)` on a long-lived process and is terminated by an
//! `echo` marker, so responses can be collected without knowing their shape in advance. A
//! process that misses its deadline is killed and replaced on the next query.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::term::{smt_symbol, Sort, Term, Vocab};
use crate::error::{Error, Result};

const DONE: &str = "@@redver-done";

/// How to start a solver.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolverConfig {
    pub program: String,
    pub args: Vec<String>,
}

impl SolverConfig {
    /// `z3` from `PATH` in SMT-LIB stdin mode.
    pub fn z3() -> Self {
        SolverConfig { program: "z3".into(), args: vec!["-in".into(), "-smt2".into()] }
    }

    /// A solver executable with its usual interactive flags when they are known.
    pub fn for_program(program: &str, args: Vec<String>) -> Self {
        if !args.is_empty() {
            return SolverConfig { program: program.into(), args };
        }
        let name = std::path::Path::new(program)
            .file_name()
            .map(|n| n.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        let args = if name.contains("z3") {
            vec!["-in".into(), "-smt2".into()]
        } else if name.contains("cvc5") || name.contains("cvc4") {
            vec!["--lang=smt2".into(), "--incremental".into()]
        } else {
            Vec::new()
        };
        SolverConfig { program: program.into(), args }
    }

    /// `REDVER_SOLVER` if set, otherwise `z3`.
    pub fn from_env() -> Self {
        match std::env::var("REDVER_SOLVER") {
            Ok(p) if !p.is_empty() => Self::for_program(&p, Vec::new()),
            _ => Self::z3(),
        }
    }

    /// Whether the executable can be started at all.
    pub fn available(&self) -> bool {
        SolverProcess::spawn(self).is_ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
    Unknown,
}

struct SolverProcess {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl SolverProcess {
    fn spawn(cfg: &SolverConfig) -> Result<Self> {
        let mut child = Command::new(&cfg.program)
            .args(&cfg.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::Solver(format!("cannot start `{}`: {e}", cfg.program)))?;
        let stdin = child.stdin.take().ok_or_else(|| Error::Solver("no stdin".into()))?;
        let stdout = child.stdout.take().ok_or_else(|| Error::Solver("no stdout".into()))?;
        let (tx, lines) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut p = SolverProcess { child, stdin, lines };
        p.send("(set-option :print-success false)\n(set-option :produce-models true)\n")?;
        Ok(p)
    }

    fn send(&mut self, text: &str) -> Result<()> {
        self.stdin
            .write_all(text.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::Solver(format!("write failed: {e}")))
    }

    fn query(&mut self, script: &str, timeout: Duration) -> Result<String> {
        self.send(script)?;
        self.send(&format!("\n(echo \"{DONE}\")\n"))?;
        let deadline = Instant::now() + timeout;
        let mut out = String::new();
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(left) {
                Ok(line) => {
                    let l = line.trim();
                    if l == DONE || l.trim_matches('"') == DONE {
                        return Ok(out);
                    }
                    out.push_str(&line);
                    out.push('\n');
                }
                Err(RecvTimeoutError::Timeout) => {
                    let _ = self.child.kill();
                    let _ = self.child.wait();
                    return Err(Error::SolverTimeout(timeout.as_millis() as u64));
                }
                Err(RecvTimeoutError::Disconnected) => {
                    let _ = self.child.wait();
                    return Err(Error::Solver(format!("solver exited; output so far: {}", out.trim())));
                }
            }
        }
    }
}

impl Drop for SolverProcess {
    fn drop(&mut self) {
        let _ = self.stdin.write_all(b"(exit)\n");
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Counters shared by every handle of a pool.
#[derive(Debug, Default)]
pub struct SolverStats {
    pub queries: AtomicU64,
    pub micros: AtomicU64,
    pub timeouts: AtomicU64,
}

impl SolverStats {
    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
    pub fn millis(&self) -> u64 {
        self.micros.load(Ordering::Relaxed) / 1000
    }
}

/// A set of solver processes; each query borrows one process exclusively.
pub struct SolverPool {
    cfg: SolverConfig,
    idle: Mutex<Vec<SolverProcess>>,
    pub stats: SolverStats,
}

impl SolverPool {
    pub fn new(cfg: SolverConfig) -> Self {
        SolverPool { cfg, idle: Mutex::new(Vec::new()), stats: SolverStats::default() }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Runs one script (already wrapped in push/pop by the caller) and returns the raw
    /// output preceding the end marker.
    pub fn run(&self, script: &str, timeout: Duration) -> Result<String> {
        let proc = self.idle.lock().unwrap().pop();
        let mut proc = match proc {
            Some(p) => p,
            None => SolverProcess::spawn(&self.cfg)?,
        };
        let start = Instant::now();
        // the solver gets the budget, the pipe gets a little slack on top
        let res = proc.query(script, timeout + Duration::from_secs(2));
        self.stats.queries.fetch_add(1, Ordering::Relaxed);
        self.stats.micros.fetch_add(start.elapsed().as_micros() as u64, Ordering::Relaxed);
        match res {
            Ok(out) => {
                self.idle.lock().unwrap().push(proc);
                // get-value after a non-sat answer is expected to complain
                let no_model = parse_sat(&out) != SatResult::Sat;
                let fatal = |l: &&str| {
                    let l = l.trim_start();
                    l.starts_with("(error") && !(no_model && l.contains("model is not available"))
                };
                if let Some(err) = out.lines().find(fatal) {
                    return Err(Error::Solver(err.trim().to_string()));
                }
                Ok(out)
            }
            Err(e) => {
                if matches!(e, Error::SolverTimeout(_)) {
                    self.stats.timeouts.fetch_add(1, Ordering::Relaxed);
                }
                Err(e)
            }
        }
    }

    /// Satisfiability of a conjunction of assertions.
    pub fn check(&self, vocab: &Vocab, asserts: &[Term], timeout: Duration) -> Result<SatResult> {
        let script = Script::new(vocab, asserts, timeout).check_sat().finish();
        let out = self.run(&script, timeout)?;
        Ok(parse_sat(&out))
    }

    /// Independent satisfiability queries sent as one script; one answer per query.
    pub fn check_many(&self, vocab: &Vocab, queries: &[Vec<Term>], timeout: Duration) -> Result<Vec<SatResult>> {
        if queries.is_empty() {
            return Ok(Vec::new());
        }
        let mut script = String::new();
        for q in queries {
            script.push_str(&Script::new(vocab, q, timeout).check_sat().finish());
        }
        let total = timeout.saturating_mul(queries.len().min(8) as u32);
        let out = self.run(&script, total)?;
        let mut answers: Vec<SatResult> = out
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| match l {
                "sat" => SatResult::Sat,
                "unsat" => SatResult::Unsat,
                _ => SatResult::Unknown,
            })
            .collect();
        answers.resize(queries.len(), SatResult::Unknown);
        Ok(answers)
    }

    /// Satisfiability plus `get-value` of the listed terms when satisfiable.
    pub fn check_values(
        &self,
        vocab: &Vocab,
        asserts: &[Term],
        values: &[Term],
        timeout: Duration,
    ) -> Result<(SatResult, Vec<(String, String)>)> {
        let mut s = Script::declaring(vocab, asserts, values, timeout).check_sat();
        if !values.is_empty() {
            s.body.push_str("(get-value (");
            for v in values {
                s.body.push_str(&format!("{v} "));
            }
            s.body.push_str("))\n");
        }
        let out = self.run(&s.finish(), timeout)?;
        let sat = parse_sat(&out);
        if sat != SatResult::Sat || values.is_empty() {
            return Ok((sat, Vec::new()));
        }
        let rest: String = out.lines().skip(1).collect::<Vec<_>>().join("\n");
        let parsed = super::sexp::parse_all(&rest).map_err(Error::Solver)?;
        let mut model = Vec::new();
        if let Some(pairs) = parsed.first().and_then(|s| s.as_list()) {
            for p in pairs {
                if let Some([k, v]) = p.as_list() {
                    model.push((k.to_string(), v.to_string()));
                }
            }
        }
        Ok((sat, model))
    }
}

fn parse_sat(out: &str) -> SatResult {
    match out.lines().map(str::trim).find(|l| !l.is_empty()) {
        Some("sat") => SatResult::Sat,
        Some("unsat") => SatResult::Unsat,
        _ => SatResult::Unknown,
    }
}

/// Declarations for every symbol of `terms` plus any explicitly listed extras.
pub fn declarations(vocab: &Vocab, terms: &[&Term]) -> String {
    let mut vars = BTreeSet::new();
    let mut funs = BTreeMap::new();
    for t in terms {
        t.collect_vars(&mut vars);
        t.collect_functions(&mut funs);
    }
    let mut out = String::new();
    for v in &vars {
        let sort = match vocab.sort(v) {
            Some(Sort::Fun(_)) | None => Sort::Int,
            Some(s) => s,
        };
        out.push_str(&format!("(declare-fun {} () {})\n", smt_symbol(v), sort.smt_name()));
    }
    for (f, arity) in &funs {
        let args = vec!["Int"; *arity].join(" ");
        out.push_str(&format!("(declare-fun {} ({args}) Int)\n", smt_symbol(f)));
    }
    out
}

/// Builder for a push/pop-scoped query.
pub struct Script {
    pub body: String,
}

impl Script {
    pub fn new(vocab: &Vocab, asserts: &[Term], timeout: Duration) -> Self {
        Self::declaring(vocab, asserts, &[], timeout)
    }

    /// Like [`Script::new`], also declaring the symbols of `extra`.
    pub fn declaring(vocab: &Vocab, asserts: &[Term], extra: &[Term], timeout: Duration) -> Self {
        let refs: Vec<&Term> = asserts.iter().chain(extra).collect();
        let mut body = String::from("(push 1)\n");
        body.push_str(&format!("(set-option :timeout {})\n", timeout.as_millis().max(1)));
        body.push_str(&declarations(vocab, &refs));
        for a in asserts {
            body.push_str(&format!("(assert {a})\n"));
        }
        Script { body }
    }

    pub fn raw(mut self, text: &str) -> Self {
        self.body.push_str(text);
        self.body.push('\n');
        self
    }

    pub fn check_sat(mut self) -> Self {
        self.body.push_str("(check-sat)\n");
        self
    }

    pub fn finish(mut self) -> String {
        self.body.push_str("(pop 1)\n");
        self.body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declarations_cover_vars_and_functions() {
        let mut v = Vocab::new();
        v.declare("x", Sort::Int);
        v.declare("a", Sort::Array);
        v.declare("f", Sort::Fun(1));
        let t = Term::eq(Term::app(super::super::term::Op::Uf("f".into()), vec![Term::var("x.1")]), Term::select(Term::var("a.0"), Term::int(0)));
        let d = declarations(&v, &[&t]);
        assert!(d.contains("(declare-fun |x.1| () Int)"));
        assert!(d.contains("(declare-fun |a.0| () (Array Int Int))"));
        assert!(d.contains("(declare-fun |f| (Int) Int)"));
    }

    #[test]
    fn sat_answers() {
        assert_eq!(parse_sat("unsat\n"), SatResult::Unsat);
        assert_eq!(parse_sat("\nsat\n((x 1))"), SatResult::Sat);
        assert_eq!(parse_sat("unknown\n"), SatResult::Unknown);
        assert_eq!(parse_sat(""), SatResult::Unknown);
    }

    #[test]
    fn missing_executable_is_a_solver_error() {
        let pool = SolverPool::new(SolverConfig::for_program("/nonexistent/solver", vec![]));
        let r = pool.check(&Vocab::new(), &[Term::Bool(true)], Duration::from_secs(1));
        assert!(matches!(r, Err(Error::Solver(_))));
    }
}
