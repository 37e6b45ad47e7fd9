//! The refinement loop.
//!
//! Each round checks whether some reduction of the program is covered by the current proof.
//! If not, the failed fixed point yields counterexamples; a feasible program trace ends the
//! loop with `Unsafe`, feasible obligations are dropped, and an infeasible candidate is
//! interpolated and its assertions are added to the proof.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::automata::{ProofAutomaton, Stepping};
use crate::error::{Error, Result};
use crate::frontend::{Alphabet, Program};
use crate::logic::interpolate::Dialect;
use crate::logic::smt::SolverConfig;
use crate::logic::term::Term;
use crate::logic::{Feasibility, Logic, Timeouts};
use crate::proofcheck::{
    extract_counterexamples, lfp, CheckOptions, CheckResult, Counterexample, CounterexampleKind, LiveProof, Mode, ModeRelations,
};

/// Counterexample selection order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    /// Prefer mostly sequential traces (long same-thread runs).
    Seq,
    /// Prefer mostly interleaved traces.
    Int,
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "seq" | "s" => Ok(Heuristic::Seq),
            "int" | "i" => Ok(Heuristic::Int),
            other => Err(format!("unknown heuristic `{other}` (expected seq or int)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub mode: Mode,
    pub heuristic: Heuristic,
    pub solver: SolverConfig,
    /// External interpolating solver; built-in Farkas interpolation when absent.
    pub interpolator: Option<SolverConfig>,
    pub timeout: Duration,
    pub round_limit: usize,
    /// Refine every infeasible counterexample of a round rather than one.
    pub refine_all: bool,
    /// How the proof automaton combines assertions when it steps.
    pub stepping: Stepping,
    pub check: CheckOptions,
    pub timeouts: Timeouts,
    /// Print each refinement to standard error.
    pub verbose: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            mode: Mode::SC,
            heuristic: Heuristic::Int,
            solver: SolverConfig::from_env(),
            interpolator: None,
            timeout: Duration::from_secs(1200),
            round_limit: 100,
            refine_all: false,
            stepping: Stepping::default(),
            check: CheckOptions::default(),
            timeouts: Timeouts::default(),
            verbose: false,
        }
    }
}

impl Options {
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Safe { proof: Vec<String>, mode: Mode, rounds: usize },
    Unsafe { trace: Vec<usize>, display: String, model: Vec<(String, String)> },
    Unknown { reason: String },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Safe { .. } => "SAFE",
            Verdict::Unsafe { .. } => "UNSAFE",
            Verdict::Unknown { .. } => "UNKNOWN",
        }
    }

    pub fn is_safe(&self) -> bool {
        matches!(self, Verdict::Safe { .. })
    }

    pub fn is_unsafe(&self) -> bool {
        matches!(self, Verdict::Unsafe { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Safe { .. } => f.write_str("SAFE"),
            Verdict::Unsafe { display, .. } => write!(f, "UNSAFE: {display}"),
            Verdict::Unknown { reason } => write!(f, "UNKNOWN ({reason})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Classification {
    InfeasibleTrace,
    InfeasibleObligation,
    FeasibleTrace,
    InvalidIgnored,
}

/// One refinement round.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RoundLog {
    pub round: usize,
    pub counterexamples: usize,
    pub infeasible_traces: usize,
    pub infeasible_obligations: usize,
    pub invalid_ignored: usize,
    pub assertions_added: usize,
    pub proof_size: usize,
    pub product_states: usize,
    /// Words refined this round, as letter ids.
    pub refined: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub benchmark: String,
    pub mode: Mode,
    pub verdict: Verdict,
    pub rounds: Vec<RoundLog>,
    pub assertions: usize,
    pub product_states: usize,
    pub solver_calls: u64,
    pub wall_ms: u64,
    /// Final proof, last check and last counterexamples, for dumps.
    #[serde(skip)]
    pub artifacts: Artifacts,
}

#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub proof: ProofAutomaton,
    pub relations: Option<ModeRelations>,
    pub last_check: Option<CheckResult>,
    pub counterexamples: Vec<Counterexample>,
}

/// The aggregate schema printed by `--stats json`.
#[derive(Clone, Debug, Serialize)]
pub struct Summary<'a> {
    pub benchmark: &'a str,
    pub mode: Mode,
    pub verdict: &'static str,
    pub rounds: usize,
    pub assertions: usize,
    pub product_states: usize,
    pub solver_calls: u64,
    pub wall_ms: u64,
}

impl Outcome {
    pub fn summary(&self) -> Summary<'_> {
        Summary {
            benchmark: &self.benchmark,
            mode: self.mode,
            verdict: self.verdict.label(),
            rounds: self.rounds.len(),
            assertions: self.assertions,
            product_states: self.product_states,
            solver_calls: self.solver_calls,
            wall_ms: self.wall_ms,
        }
    }
}

/// Every round but the last adds an assertion, and no word is refined twice.
pub fn audit_rounds(rounds: &[RoundLog]) -> bool {
    let mut seen = HashSet::new();
    let progress = rounds.iter().rev().skip(1).all(|r| r.assertions_added >= 1);
    progress && rounds.iter().flat_map(|r| &r.refined).all(|w| seen.insert(w.clone()))
}

/// Length of the longest run of consecutive letters from one thread.
pub fn longest_run(alphabet: &Alphabet, word: &[usize]) -> usize {
    let mut best = 0;
    let mut run = 0;
    let mut last = None;
    for &a in word {
        let t = if a < alphabet.program_letters { alphabet.thread(a) } else { None };
        match t {
            Some(t) if last == Some(t) => run += 1,
            Some(_) => run = 1,
            None => run = 0,
        }
        last = t;
        best = best.max(run);
    }
    best
}

/// Orders candidates best first.
pub fn rank(alphabet: &Alphabet, cs: &mut [Counterexample], heuristic: Heuristic) {
    cs.sort_by_cached_key(|c| {
        let run = longest_run(alphabet, c.prefix()) as i64;
        let score = match heuristic {
            Heuristic::Seq => -run,
            Heuristic::Int => run,
        };
        (score, c.is_obligation(), c.word.len(), c.word.clone())
    });
}

/// The preferred candidate.
pub fn select(alphabet: &Alphabet, cs: &[Counterexample], heuristic: Heuristic) -> Option<Counterexample> {
    let mut v = cs.to_vec();
    rank(alphabet, &mut v, heuristic);
    v.into_iter().next()
}

/// Classifies one candidate; a program trace of unknown feasibility is an error.
pub fn classify(logic: &Logic, c: &Counterexample) -> Result<(Classification, Feasibility)> {
    let f = logic.feasible(&c.word)?;
    let class = match (&c.kind, &f) {
        (CounterexampleKind::ProgramTrace, Feasibility::Infeasible) => Classification::InfeasibleTrace,
        (CounterexampleKind::ProgramTrace, Feasibility::Feasible(_)) => Classification::FeasibleTrace,
        (CounterexampleKind::ProgramTrace, Feasibility::Unknown) => {
            return Err(Error::Solver("feasibility of a program trace is unknown".into()))
        }
        (CounterexampleKind::SoundnessObligation(..), Feasibility::Infeasible) => Classification::InfeasibleObligation,
        (CounterexampleKind::SoundnessObligation(..), _) => Classification::InvalidIgnored,
    };
    Ok((class, f))
}

/// Interpolates an infeasible word and adds the assertions; returns how many were new.
pub fn refine(logic: &Logic, proof: &mut ProofAutomaton, word: &[usize]) -> Result<usize> {
    let seq = logic.interpolate(word)?;
    Ok(proof.insert_all(seq))
}

fn dialect_for(cfg: &SolverConfig) -> Result<Dialect> {
    Dialect::for_program(&cfg.program)
        .ok_or_else(|| Error::Precondition(format!("no interpolation dialect known for `{}`", cfg.program)))
}

/// Runs the loop under `opts`.
pub fn verify(program: &Program, opts: &Options) -> Result<Outcome> {
    let mut logic = Logic::new(&program.alphabet, opts.solver.clone());
    logic.timeouts = opts.timeouts;
    if let Some(cfg) = &opts.interpolator {
        logic = logic.with_interpolator(cfg.clone(), dialect_for(cfg)?);
    }
    verify_with(program, &logic, opts)
}

fn assertion_text(proof: &ProofAutomaton) -> Vec<String> {
    proof.assertions().iter().map(Term::pretty).collect()
}

/// Runs the loop with a prepared [`Logic`], returning the final proof as well.
pub fn verify_with(program: &Program, logic: &Logic, opts: &Options) -> Result<Outcome> {
    let start = Instant::now();
    let mut art = Artifacts { proof: ProofAutomaton::with_stepping(opts.stepping), ..Artifacts::default() };
    let (verdict, rounds, product_states) = run_loop(program, logic, opts, &mut art, start)?;
    Ok(Outcome {
        benchmark: program.name.clone(),
        mode: opts.mode,
        verdict,
        assertions: art.proof.len(),
        product_states,
        rounds,
        solver_calls: logic.solver_calls(),
        wall_ms: start.elapsed().as_millis() as u64,
        artifacts: art,
    })
}

fn unknown(reason: impl Into<String>) -> Verdict {
    Verdict::Unknown { reason: reason.into() }
}

fn run_loop(
    program: &Program,
    logic: &Logic,
    opts: &Options,
    art: &mut Artifacts,
    start: Instant,
) -> Result<(Verdict, Vec<RoundLog>, usize)> {
    let aut = &program.automaton;
    let alphabet = &program.alphabet;
    let n = alphabet.program_letters;
    let mut rounds: Vec<RoundLog> = Vec::new();
    let mut last_states = 0;
    let rels = match ModeRelations::new(opts.mode, &aut.dfa, logic) {
        Ok(r) => r,
        Err(e @ (Error::Solver(_) | Error::SolverTimeout(_))) => return Ok((unknown(e.to_string()), rounds, 0)),
        Err(e) => return Err(e),
    };
    art.relations = Some(rels.clone());
    let proof = &mut art.proof;
    let mut ignored: HashSet<Vec<usize>> = HashSet::new();
    let mut refined: HashSet<Vec<usize>> = HashSet::new();
    for round in 1..=opts.round_limit {
        if start.elapsed() > opts.timeout {
            return Ok((unknown("timeout"), rounds, last_states));
        }
        let checked = {
            let mut view = LiveProof { proof: &mut *proof, oracle: logic, letters: n };
            let check = CheckOptions { deadline: Some(start + opts.timeout), ..opts.check };
            lfp(&aut.dfa, aut.sink, &mut view, &rels, check)
        };
        let res = match checked {
            Ok(r) => r,
            Err(Error::Deadline) => return Ok((unknown("timeout"), rounds, last_states)),
            Err(e @ (Error::ProductOverflow { .. } | Error::Solver(_) | Error::SolverTimeout(_))) => {
                return Ok((unknown(e.to_string()), rounds, last_states))
            }
            Err(e) => return Err(e),
        };
        last_states = res.product_states();
        let mut log = RoundLog { round, product_states: last_states, ..RoundLog::default() };
        if res.passed {
            log.proof_size = proof.len();
            rounds.push(log);
            art.last_check = Some(res);
            let verdict = Verdict::Safe { proof: assertion_text(proof), mode: opts.mode, rounds: round };
            return Ok((verdict, rounds, last_states));
        }
        let mut cands = extract_counterexamples(&res, opts.mode);
        art.last_check = Some(res);
        cands.retain(|c| !ignored.contains(&c.word));
        log.counterexamples = cands.len();
        rank(alphabet, &mut cands, opts.heuristic);
        art.counterexamples = cands.clone();
        let mut any_refined = false;
        // one program trace and one obligation per round, unless everything is refined
        let (mut trace_done, mut obligation_done) = (false, false);
        for c in &cands {
            let done = if c.is_obligation() { obligation_done } else { trace_done };
            if done && !opts.refine_all {
                continue;
            }
            if start.elapsed() > opts.timeout {
                break;
            }
            if refined.contains(&c.word) {
                // the word is proven already; revisiting it means the check lost precision
                continue;
            }
            let (class, f) = match classify(logic, c) {
                Ok(v) => v,
                Err(e @ (Error::Solver(_) | Error::SolverTimeout(_))) => {
                    rounds.push(log);
                    return Ok((unknown(e.to_string()), rounds, last_states));
                }
                Err(e) => return Err(e),
            };
            match class {
                Classification::FeasibleTrace => {
                    let model = match f {
                        Feasibility::Feasible(m) => m,
                        _ => Vec::new(),
                    };
                    rounds.push(log);
                    let verdict =
                        Verdict::Unsafe { trace: c.word.clone(), display: alphabet.display_word(&c.word), model };
                    return Ok((verdict, rounds, last_states));
                }
                Classification::InvalidIgnored => {
                    log.invalid_ignored += 1;
                    ignored.insert(c.word.clone());
                }
                Classification::InfeasibleTrace | Classification::InfeasibleObligation => {
                    if class == Classification::InfeasibleTrace {
                        log.infeasible_traces += 1;
                    } else {
                        log.infeasible_obligations += 1;
                    }
                    let before = proof.len();
                    let added = match refine(logic, proof, &c.word) {
                        Ok(k) => k,
                        Err(e @ (Error::Interpolation(_) | Error::Solver(_) | Error::SolverTimeout(_))) => {
                            rounds.push(log);
                            return Ok((unknown(e.to_string()), rounds, last_states));
                        }
                        Err(e) => return Err(e),
                    };
                    log.assertions_added += added;
                    if opts.verbose {
                        eprintln!("round {round}: {:?} {}", class, alphabet.display_word(&c.word));
                        for t in &proof.assertions()[before..] {
                            eprintln!("    + {}", t.pretty());
                        }
                    }
                    log.refined.push(c.word.clone());
                    refined.insert(c.word.clone());
                    any_refined = true;
                    if c.is_obligation() {
                        obligation_done = true;
                    } else {
                        trace_done = true;
                    }
                    if trace_done && obligation_done && !opts.refine_all {
                        break;
                    }
                }
            }
        }
        log.proof_size = proof.len();
        let added = log.assertions_added;
        rounds.push(log);
        if !any_refined {
            return Ok((unknown("all counterexamples invalid"), rounds, last_states));
        }
        if added == 0 {
            return Ok((unknown("refinement added no assertion"), rounds, last_states));
        }
    }
    Ok((unknown("round limit"), rounds, last_states))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::LetterSet;

    fn two_threads() -> Program {
        crate::frontend::load("int x, y; pre(true); par { thread { x := 1; x := 2; } thread { y := 1; y := 2; } } post(true);")
            .unwrap()
    }

    fn ce(word: Vec<usize>) -> Counterexample {
        let sleep = vec![LetterSet::EMPTY; word.len()];
        Counterexample { word, kind: CounterexampleKind::ProgramTrace, sleep }
    }

    #[test]
    fn heuristics_pick_run_extremes() {
        let p = two_threads();
        let a = &p.alphabet;
        let name = |s: &str| (0..a.program_letters).find(|&i| a.name(i).ends_with(s)).unwrap();
        let (a1, a2, b1, b2) = (name("x := 1"), name("x := 2"), name("y := 1"), name("y := 2"));
        let (pre, post) = (a.pre_letter, a.post_letter);
        let seq = ce(vec![pre, a1, a2, b1, b2, post]);
        let int = ce(vec![pre, a1, b1, a2, b2, post]);
        let set = vec![int.clone(), seq.clone()];
        assert_eq!(select(a, &set, Heuristic::Seq).unwrap(), seq);
        assert_eq!(select(a, &set, Heuristic::Int).unwrap(), int);
        assert_eq!(select(a, &[seq.clone()], Heuristic::Int).unwrap(), seq);
    }

    #[test]
    fn audit_flags_repeats_and_stalls() {
        let r = |added, w: Vec<usize>| RoundLog { assertions_added: added, refined: vec![w], ..RoundLog::default() };
        assert!(audit_rounds(&[r(1, vec![0]), r(2, vec![1]), r(0, vec![])]));
        assert!(!audit_rounds(&[r(1, vec![0]), r(1, vec![0]), r(0, vec![])]));
        assert!(!audit_rounds(&[r(0, vec![0]), r(1, vec![1]), r(0, vec![])]));
    }
}
