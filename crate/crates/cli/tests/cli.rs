use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use linsplit::formula::rational::int;
use linsplit::smtlib::{parse_model, parse_script};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linsplit"))
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn golden_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(golden(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "smt2"))
        .collect();
    files.sort();
    files
}

fn expected_status(text: &str) -> &str {
    let i = text.find(":status ").expect("golden files declare a status") + 8;
    text[i..].split(')').next().unwrap()
}

#[test]
fn golden_statuses_exit_codes_and_models() {
    let files = golden_files();
    assert_eq!(files.len(), 9);
    for f in files {
        let text = std::fs::read_to_string(&f).unwrap();
        let want = expected_status(&text);
        let o = run(&[f.to_str().unwrap()]);
        let out = stdout(&o);
        let first = out.lines().next().unwrap();
        assert_eq!(first, want, "{}", f.display());
        let code = match first {
            "sat" => 0,
            "unsat" => 1,
            _ => 2,
        };
        assert_eq!(o.status.code(), Some(code), "{}", f.display());
        if first == "sat" && !text.contains("NIA_EA") {
            let script = parse_script(&text).unwrap();
            let m = parse_model(&out, &script.formula.vars).unwrap();
            for v in script.declared_vars() {
                assert!(m.get(v).is_some(), "{} lacks a value", f.display());
            }
            for t in &script.hard_asserts {
                assert!(t.eval(&m).unwrap(), "{}: model violates an assertion", f.display());
            }
        }
    }
}

#[test]
fn optimization_objectives() {
    for (file, objective) in [("weighted.smt2", "1"), ("pairs_maxsmt.smt2", "2"), ("invariant.smt2", "0")] {
        let out = stdout(&run(&[golden(file).to_str().unwrap()]));
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "sat", "{file}");
        assert_eq!(lines[1], format!("(objective {objective})"), "{file}");
        assert!(lines[2].starts_with("(model (define-fun "), "{file}");
    }
}

#[test]
fn explicit_modes() {
    let running = golden("running.smt2");
    let o = run(&["--mode", "smt", "--strategy", "maxsmt", running.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("sat\n(model "));

    // smt mode ignores the soft part, so no objective line.
    let weighted = golden("weighted.smt2");
    let o = run(&["--mode", "smt", weighted.to_str().unwrap()]);
    assert!(!stdout(&o).contains("objective"));

    for strategy in ["cores", "omt", "jump", "jump-cores"] {
        let o = run(&["--mode", "smt", "--strategy", strategy, running.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{strategy}");
    }
    let o = run(&["--mode", "maxsmt", weighted.to_str().unwrap()]);
    assert!(stdout(&o).contains("(objective 1)"));
}

#[test]
fn usage_errors_exit_with_three() {
    let running = golden("running.smt2");
    let r = running.to_str().unwrap();
    for args in [
        vec!["--timeout", "0", r],
        vec!["--strategy", "fastest", r],
        vec!["--alpha", "0", r],
        vec!["--radius", "0", r],
        vec!["--oracle-box", "3", "1", r],
        vec!["--mode", "ea", r],
        vec!["--mode", "maxsmt", "--strategy", "jump", r],
        vec!["--bogus"],
        vec![],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(3), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    let inv = golden("invariant.smt2");
    assert_eq!(run(&["--mode", "smt", inv.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn input_errors_report_positions() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.smt2");
    std::fs::write(&bad, "(declare-const x Int)\n(assert (> (/ x 2) 1))\n(check-sat)\n").unwrap();
    let o = run(&[bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("2:12: unsupported: division"), "{}", stderr(&o));
    let missing = dir.path().join("missing.smt2");
    assert_eq!(run(&[missing.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn stats_go_to_stderr() {
    let o = run(&["--stats", golden("weighted.smt2").to_str().unwrap()]);
    let err = stderr(&o);
    for key in ["iterations", "case-clauses-added", "optimizer-calls", "time-ms"] {
        assert!(err.lines().any(|l| l.starts_with(&format!("; {key} "))), "{key} missing in {err}");
    }
    assert!(!stdout(&o).contains("; "));

    let o = run(&["--stats", golden("running.smt2").to_str().unwrap()]);
    let err = stderr(&o);
    let first = err.lines().find(|l| l.starts_with("; iteration 1 ")).unwrap();
    assert!(first.contains(" bound-cost 1 soft-cost 0 "), "{first}");
    let o = run(&["--stats", "--strategy", "jump-cores", golden("running.smt2").to_str().unwrap()]);
    let err = stderr(&o);
    let first = err.lines().find(|l| l.starts_with("; iteration 1 ")).unwrap();
    assert!(first.ends_with(" blocking-literals 5"), "{first}");
}

#[test]
fn oracle_box_cross_check() {
    let o = run(&["--oracle-box", "-6", "6", golden("weighted.smt2").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("; oracle: model with cost 1 in [-6, 6]; consistent"), "{}", stderr(&o));
    let o = run(&["--oracle-box", "-6", "6", golden("negative_square.smt2").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no model in box"));
}

#[test]
fn runs_are_deterministic() {
    for file in ["weighted.smt2", "pairs_maxsmt.smt2", "bools.smt2"] {
        let a = stdout(&run(&["--seed", "7", golden(file).to_str().unwrap()]));
        let b = stdout(&run(&["--seed", "7", golden(file).to_str().unwrap()]));
        assert_eq!(a, b, "{file}");
    }
}

fn bench_records(dir: &Path, extra: &[&str]) -> (Vec<serde_json::Value>, Output) {
    let mut args = vec!["--bench", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args);
    let records = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    (records, o)
}

#[test]
fn bench_reports_expected_statuses() {
    let (records, o) = bench_records(&golden(""), &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(records.len(), 9);
    for r in &records {
        assert_eq!(r["status"], r["expected"], "{r}");
        assert!(r["time_ms"].is_u64() && r["iterations"].is_u64());
    }
    let weighted = records.iter().find(|r| r["file"] == "weighted.smt2").unwrap();
    assert_eq!(weighted["objective"], "1");
    assert!(records.iter().find(|r| r["file"] == "running.smt2").unwrap().get("objective").is_none());
    assert!(stderr(&o).contains("9 files: 6 sat, 3 unsat, 0 unknown, 0 error; 0 unexpected"));
}

#[test]
fn bench_of_empty_dir_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let (records, o) = bench_records(dir.path(), &[]);
    assert!(records.is_empty());
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stderr.is_empty());
}

#[test]
fn bench_timeout_and_unreadable_files() {
    let dir = tempfile::tempdir().unwrap();
    // x³ + y³ + z³ = 4 has no integer solution (cubes are 0, ±1 mod 9), which
    // bounded case splitting cannot prove.
    std::fs::write(
        dir.path().join("cubes.smt2"),
        "(set-logic QF_NIA)\n(declare-const x Int)\n(declare-const y Int)\n(declare-const z Int)\n\
         (assert (= (+ (* x x x) (* y y y) (* z z z)) 4))\n(check-sat)\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("binary.smt2"), [0xff, 0xfe, 0x00]).unwrap();
    let (records, o) = bench_records(dir.path(), &["--timeout", "1"]);
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["file"], "cubes.smt2");
    assert_eq!(records[0]["status"], "unknown");
    assert!(stderr(&o).contains("warning: skipping"));
}

#[test]
fn model_values_round_trip_through_the_printer() {
    let out = stdout(&run(&[golden("weighted.smt2").to_str().unwrap()]));
    let text = std::fs::read_to_string(golden("weighted.smt2")).unwrap();
    let script = parse_script(&text).unwrap();
    let m = parse_model(&out, &script.formula.vars).unwrap();
    let f = &script.formula;
    let ball = ["t", "x", "y"]
        .iter()
        .map(|n| {
            let v = m.get(f.vars.lookup(n).unwrap()).unwrap().clone();
            &v * &v
        })
        .fold(int(0), |a, b| a + b);
    // Objective 1 means the soft ball is violated.
    assert!(ball > int(1));
}
