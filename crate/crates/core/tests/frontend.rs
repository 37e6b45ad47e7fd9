//! Lowering against an independent interleaving enumerator.

use std::path::PathBuf;

use redver::frontend::{self, trace_of};
use redver::oracle::{self, FiniteLanguage};

fn bench(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks").join(name);
    std::fs::read_to_string(path).unwrap()
}

const BRANCHY: &str = "
int x, y;
pre(x == 0);
par {
    thread {
        if (x > 0) { y := 1; } else { y := 2; }
        x := x + 1;
    }
    thread {
        while (*) { x := x - 1; }
    }
}
post(true);
";

const THREE: &str = "
int x;
pre(true);
par {
    thread { x := 1; }
    thread { x := 2; x := 3; }
    thread { assume(x > 0); }
}
post(x > 0);
";

/// Accepted words up to `bound` coincide with shuffles of complete thread paths.
fn agrees(src: &str, bound: usize) {
    let p = frontend::load(src).unwrap();
    let from_dfa = FiniteLanguage::from_dfa(&p.automaton.dfa, bound).unwrap();
    let shuffles = oracle::interleavings(&p.automaton, &p.alphabet, bound).unwrap();
    assert_eq!(from_dfa, shuffles);
    for w in shuffles.words() {
        assert!(trace_of(&p.automaton, w));
    }
}

#[test]
fn accepted_words_are_interleavings() {
    agrees(BRANCHY, 9);
    agrees(THREE, 7);
    agrees(&bench("fig6.imp"), 8);
    agrees(&bench("fig1.imp"), 12);
    agrees(&bench("fig4.imp"), 12);
}

#[test]
fn rejects_incomplete_and_foreign_words() {
    let p = frontend::load(THREE).unwrap();
    let (pre, post) = (p.alphabet.pre_letter, p.alphabet.post_letter);
    assert!(!trace_of(&p.automaton, &[]));
    assert!(!trace_of(&p.automaton, &[pre, post]));
    // the second thread's statements out of program order
    let x2 = (0..p.alphabet.program_letters).find(|&a| p.alphabet.statements[a].display == "x := 2").unwrap();
    let x3 = (0..p.alphabet.program_letters).find(|&a| p.alphabet.statements[a].display == "x := 3").unwrap();
    let others: Vec<usize> = (1..post).filter(|&a| a != x2 && a != x3).collect();
    let mut w = vec![pre, x3, x2];
    w.extend(&others);
    w.push(post);
    assert!(!trace_of(&p.automaton, &w));
}

#[test]
fn sink_is_absorbing_and_rejecting() {
    let p = frontend::load(BRANCHY).unwrap();
    let aut = &p.automaton;
    assert!(!aut.dfa.is_final(aut.sink));
    for a in 0..aut.dfa.letters {
        assert_eq!(aut.step(aut.sink, a), aut.sink);
    }
    assert_eq!(aut.thread_graphs.len(), 2);
}

#[test]
fn alphabet_reserves_one_marker_per_ordered_pair() {
    let p = frontend::load(THREE).unwrap();
    let n = p.alphabet.program_letters;
    assert_eq!(p.alphabet.len(), n + n * (n - 1));
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a) {
            let m = p.alphabet.marker(a, b);
            assert_eq!(p.alphabet.marker_pair(m), Some((a, b)));
            assert_eq!(oracle::marker_pair(n, m), Some((a, b)));
        }
    }
}

#[test]
fn errors_are_reported_with_positions() {
    let err = frontend::load("int x;\npre(true);\npar { thread { x := 1 } } post(true);").unwrap_err();
    assert!(matches!(err, redver::Error::Parse { line: 3, .. }), "{err}");
    let err = frontend::load("int x; pre(true); par { thread { y := 1; } } post(true);").unwrap_err();
    assert!(matches!(err, redver::Error::Semantic { .. }), "{err}");
}
