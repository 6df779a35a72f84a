mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::golden_dir;

fn d2d(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_d2d")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn golden(name: &str) -> String {
    golden_dir().join(format!("{name}.graph")).display().to_string()
}

#[test]
fn gen_headers_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let o = d2d(&["gen", "lowerbound", "--n", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("8 12"));

    let o = d2d(&["gen", "path", "--n", "3", "-o", "p3.graph"], dir.path());
    assert_eq!(stdout(&o), "n=3 m=2 delta=2\n");
    let text = std::fs::read_to_string(dir.path().join("p3.graph")).unwrap();
    assert_eq!(text.lines().next(), Some("3 2"));

    let a = d2d(&["gen", "random", "--n", "10", "--m", "20", "--seed", "7"], dir.path());
    let b = d2d(&["gen", "random", "--n", "10", "--m", "20", "--seed", "7"], dir.path());
    assert_eq!(a.stdout, b.stdout);

    let bad = d2d(&["gen", "random", "--n", "4", "--m", "20"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("cannot carry"));
}

#[test]
fn run_k2() {
    let dir = tempfile::tempdir().unwrap();
    let o = d2d(&["run", &golden("k2"), "--k", "2", "--root", "0"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("placement:\n  0 1,2\n"), "{out}");
    assert!(out.contains("rounds: stage1=4 total=10"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn run_p3_with_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = d2d(&["run", &golden("p3"), "--k", "2", "--trace", "t.jsonl", "--dot", "p.dot"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("placement:\n  0 1\n  2 2\n"));
    let trace = std::fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    let expected = std::fs::read_to_string(golden_dir().join("p3.jsonl")).unwrap();
    assert_eq!(trace, expected);
    let dot = std::fs::read_to_string(dir.path().join("p.dot")).unwrap();
    assert!(dot.starts_with("graph G {"));

    let again = d2d(&["run", &golden("p3"), "--k", "2"], dir.path());
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn run_warmup_skips_termination() {
    let dir = tempfile::tempdir().unwrap();
    let o = d2d(&["run", &golden("k3"), "--k", "2", "--strategy", "warmup", "--delta", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("SKIP termination"));
}

#[test]
fn run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = d2d(&["run", &golden("k3"), "--k", "2", "--fault", "skip-vp-write"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("virtualparent recorded"));

    let o = d2d(&["run", &golden("k3"), "--k", "2", "--max-rounds", "5"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL round-bounds"));

    let o = d2d(&["run", &golden("k3"), "--k", "2", "--max-rounds", "5", "--no-check"], dir.path());
    assert_eq!(o.status.code(), Some(0));

    let o = d2d(&["run", "missing.graph", "--k", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = d2d(&["run", &golden("k3"), "--k", "2", "--root", "9"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = d2d(&["run", &golden("k3")], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = d2d(&["sweep", "--family", "lowerbound", "--n", "3..8", "--k", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(d2d::cli::CSV_HEADER));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!(r[6].parse::<u64>().unwrap() <= r[8].parse::<u64>().unwrap());
        assert_eq!(r[11], "true");
    }

    let o = d2d(&["sweep", "--family", "random", "--n", "12", "--seeds", "0..49", "-o", "m.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    let again = d2d(&["sweep", "--family", "random", "--n", "12", "--seeds", "0..49"], dir.path());
    assert_eq!(stdout(&again), csv);

    let o = d2d(&["sweep", "--family", "lowerbound", "--n", "5..4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);

    let o = d2d(&["sweep", "--graph", &golden("k3"), "--graph", &golden("p3"), "--k", "1..3"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn sweep_reports_failed_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = d2d(&["sweep", "--graph", &golden("k3"), "--k", "2", "--max-rounds", "5"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",false"));
    assert!(stderr(&o).contains("row failed"));
}

#[test]
fn check_placements() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("ok.txt"), "0 1\n2 2\n").unwrap();
    std::fs::write(p.join("bad.txt"), "0 1\n1 2\n").unwrap();
    std::fs::write(p.join("broken.txt"), "0 1\n\n1 x\n").unwrap();

    let o = d2d(&["check", &golden("p3"), "ok.txt"], p);
    assert_eq!(o.status.code(), Some(0));
    let o = d2d(&["check", &golden("p3"), "bad.txt"], p);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL independence: edge (0,1)"));
    let o = d2d(&["check", &golden("p3"), "broken.txt"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"));

    std::fs::write(p.join("stacked.txt"), "1 1,2\n").unwrap();
    let o = d2d(&["check", &golden("p3"), "stacked.txt", "--root", "0"], p);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL multiplicity: node 1"));
    let o = d2d(&["check", &golden("p3"), "stacked.txt"], p);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(d2d(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(d2d(&["bogus"], dir.path()).status.code(), Some(2));
}
