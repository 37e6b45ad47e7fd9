//! The `redver` binary: exit codes, reports, stats and dumps.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bench(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks").join(name)
}

fn redver(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_redver")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exit_codes_follow_the_verdict() {
    let safe = redver(&[path(&bench("fig6.imp"))]);
    assert_eq!(safe.status.code(), Some(0));
    assert!(stdout(&safe).starts_with("SAFE"));

    let unsafe_ = redver(&["--mode", "none", path(&bench("unsafe/fig6_negated.imp"))]);
    assert_eq!(unsafe_.status.code(), Some(1));
    let text = stdout(&unsafe_);
    assert!(text.starts_with("UNSAFE") && text.contains("trace:"), "{text}");

    let unknown = redver(&["--round-limit", "1", path(&bench("fig1.imp"))]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(stdout(&unknown).contains("reason: round limit"));
}

#[test]
fn input_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.imp");
    std::fs::write(&bad, "int x; pre(true); par { thread { x := ; } } post(true);").unwrap();
    let o = redver(&[path(&bad)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.imp"));
    assert_eq!(redver(&[path(&dir.path().join("missing.imp"))]).status.code(), Some(3));
    assert_eq!(redver(&["--mode", "xyz", path(&bad)]).status.code(), Some(3));
}

#[test]
fn stats_json_is_one_object_per_line() {
    let o = redver(&["--stats", "json", path(&bench("fig6.imp"))]);
    let text = stdout(&o);
    let lines: Vec<serde_json::Value> = text.lines().skip(1).map(|l| serde_json::from_str(l).unwrap()).collect();
    let summary = lines.last().unwrap();
    assert_eq!(summary["verdict"], "SAFE");
    assert_eq!(summary["mode"], "sc");
    assert_eq!(summary["rounds"].as_u64().unwrap() as usize, lines.len() - 1);
}

#[test]
fn dumps_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let o = redver(&[
        "--dump",
        "proof,dot,antichains,relations,counterexamples",
        "--dump-dir",
        path(dir.path()),
        path(&bench("fig6.imp")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["fig6.proof.json", "fig6.antichains.json", "fig6.counterexamples.json"] {
        let text = std::fs::read_to_string(dir.path().join(f)).unwrap();
        serde_json::from_str::<serde_json::Value>(&text).unwrap_or_else(|e| panic!("{f}: {e}"));
    }
    for f in ["fig6.program.dot", "fig6.proof.dot"] {
        assert!(std::fs::read_to_string(dir.path().join(f)).unwrap().starts_with("digraph"));
    }
    assert!(dir.path().join("fig6.relations.tsv").exists());
}

#[test]
fn corpus_mode_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(bench("fig6.imp"), dir.path().join("a.imp")).unwrap();
    std::fs::copy(bench("unsafe/fig6_negated.imp"), dir.path().join("b.imp")).unwrap();
    std::fs::write(dir.path().join("c.imp"), "not a program").unwrap();
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let report = dir.path().join("report.json");
    let o = redver(&["--report", path(&report), path(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!((v["safe"].as_u64(), v["unsafe_"].as_u64(), v["errors"].as_u64()), (Some(1), Some(1), Some(1)));
    let rows = v["rows"].as_array().unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r["benchmark"].as_str().unwrap()).collect();
    assert_eq!(names, ["a", "b", "c"]);
    assert!(stdout(&o).contains("safe 1  unsafe 1  unknown 0  errors 1"));
}
