//! End-to-end verdicts, checked against exhaustive trace enumeration on loop-free programs.

use std::path::PathBuf;
use std::time::Duration;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use redver::automata::Stepping;
use redver::cegar::{self, audit_rounds, Options, Verdict};
use redver::frontend::{self, trace_of, Program};
use redver::logic::smt::SolverConfig;
use redver::logic::{Feasibility, Logic};
use redver::oracle;
use redver::proofcheck::Mode;

fn bench(name: &str) -> Program {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks").join(name);
    frontend::load_file(&path).unwrap()
}

fn opts(mode: Mode) -> Options {
    Options { timeout: Duration::from_secs(60), ..Options::default() }.with_mode(mode)
}

/// Safe exactly when no complete trace is feasible, decided by a fresh solver per trace.
fn ground_truth(p: &Program) -> bool {
    let logic = Logic::new(&p.alphabet, SolverConfig::from_env());
    let traces = oracle::interleavings(&p.automaton, &p.alphabet, 16).unwrap();
    assert!(!traces.is_empty());
    traces.words().iter().all(|w| match logic.feasible(w).unwrap() {
        Feasibility::Infeasible => true,
        Feasibility::Feasible(_) => false,
        Feasibility::Unknown => panic!("solver gave up on {w:?}"),
    })
}

fn check_counterexample(p: &Program, v: &Verdict) {
    let Verdict::Unsafe { trace, .. } = v else { panic!("expected UNSAFE, got {v}") };
    assert!(trace_of(&p.automaton, trace));
    let logic = Logic::new(&p.alphabet, SolverConfig::from_env());
    assert!(matches!(logic.feasible(trace).unwrap(), Feasibility::Feasible(_)));
}

#[test]
fn small_benchmark_is_safe_in_every_mode() {
    let p = bench("fig6.imp");
    for mode in Mode::ALL {
        for stepping in [Stepping::Single, Stepping::Conjunctive] {
            let o = cegar::verify(&p, &Options { stepping, ..opts(mode) }).unwrap();
            assert!(o.verdict.is_safe(), "{mode} {stepping:?}: {}", o.verdict);
            assert!(audit_rounds(&o.rounds));
            assert_eq!(o.rounds.len(), match &o.verdict {
                Verdict::Safe { rounds, .. } => *rounds,
                _ => unreachable!(),
            });
        }
    }
}

#[test]
fn negated_benchmarks_are_unsafe() {
    for name in ["unsafe/fig1_negated.imp", "unsafe/fig4_negated.imp", "unsafe/fig6_negated.imp"] {
        let p = bench(name);
        let o = cegar::verify(&p, &opts(Mode::SC)).unwrap();
        check_counterexample(&p, &o.verdict);
    }
}

#[test]
fn round_limit_gives_unknown() {
    let p = bench("fig1.imp");
    let o = cegar::verify(&p, &Options { round_limit: 1, ..opts(Mode::SC) }).unwrap();
    assert_eq!(o.verdict, Verdict::Unknown { reason: "round limit".into() });
    assert_eq!(o.rounds.len(), 1);
    assert!(o.rounds[0].assertions_added > 0);
}

#[test]
fn exhausted_time_gives_unknown() {
    let p = bench("fig1.imp");
    let o = cegar::verify(&p, &Options { timeout: Duration::ZERO, ..opts(Mode::None) }).unwrap();
    assert!(o.verdict.is_unknown(), "{}", o.verdict);
}

const POOL: [&str; 8] = ["x := x + 1;", "x := y;", "y := 2;", "y := y - x;", "assume(x > 0);", "assume(y <= 1);", "x := 0;", "y := x + y;"];
const POSTS: [&str; 5] = ["x >= 0", "y <= 2", "x + y != 3", "x <= y", "!(x == 1 && y == 1)"];

/// A random two-thread loop-free program.
fn random_program(rng: &mut StdRng) -> String {
    let thread = |rng: &mut StdRng| -> String {
        let k = rng.gen_range(1..=2);
        (0..k).map(|_| POOL[rng.gen_range(0..POOL.len())]).collect::<Vec<_>>().join(" ")
    };
    let (a, b) = (thread(rng), thread(rng));
    let post = POSTS[rng.gen_range(0..POSTS.len())];
    format!("int x, y;\npre(x == 0 && y == 0);\npar {{\n thread {{ {a} }}\n thread {{ {b} }}\n}}\npost({post});\n")
}

#[test]
fn verdicts_match_exhaustive_enumeration() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let (mut safe, mut unsafe_) = (0, 0);
    for _ in 0..16 {
        let src = random_program(&mut rng);
        let p = frontend::load(&src).unwrap();
        let truth = ground_truth(&p);
        for mode in Mode::ALL {
            let o = cegar::verify(&p, &opts(mode)).unwrap();
            if truth {
                assert!(o.verdict.is_safe(), "{mode}: {}\n{src}", o.verdict);
            } else {
                check_counterexample(&p, &o.verdict);
            }
        }
        if truth {
            safe += 1;
        } else {
            unsafe_ += 1;
        }
    }
    // the sample exercises both outcomes
    assert!(safe > 0 && unsafe_ > 0, "{safe} safe, {unsafe_} unsafe");
}
