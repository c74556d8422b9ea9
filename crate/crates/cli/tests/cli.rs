use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use popcrit::fixtures::{FIG1, FIG4};
use tempfile::TempDir;

fn popcrit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_popcrit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_fig1_reports_deficiency_one() {
    let dir = TempDir::new().unwrap();
    let inst = file(&dir, "fig1.inst", FIG1);
    let out = popcrit(&["solve", s(&inst)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# deficiency 1\n"), "{text}");
    assert!(text.contains("# size 3\n"), "{text}");
}

#[test]
fn solve_output_is_a_matching_file() {
    let dir = TempDir::new().unwrap();
    let inst = file(&dir, "fig4.inst", FIG4);
    let m = file(&dir, "out.match", &stdout(&popcrit(&["solve", s(&inst)])));
    let out = popcrit(&["verify", s(&inst), s(&m)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.contains("size 6\n")
            && text.contains("deficiency 0 ")
            && text.contains("feasible yes"),
        "{text}"
    );
}

#[test]
fn verify_fig1_m1() {
    let dir = TempDir::new().unwrap();
    let inst = file(&dir, "fig1.inst", FIG1);
    let m = file(&dir, "m1.match", "# M1\na1 b1\na1 b2\na3 b2\n");
    let text = stdout(&popcrit(&["verify", s(&inst), s(&m)]));
    assert!(text.contains("deficiency 2 (A 2, B 0)"), "{text}");
    assert!(text.contains("feasible no"), "{text}");
}

#[test]
fn oracle_agrees_on_fixtures() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [("fig1.inst", FIG1), ("fig4.inst", FIG4)] {
        let inst = file(&dir, name, text);
        let out = popcrit(&["oracle", s(&inst), "--jobs", "2", "--list"]);
        assert_eq!(out.status.code(), Some(0));
        assert!(stdout(&out).ends_with("PASS\n"));
    }
}

#[test]
fn oracle_budget_exceeded_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let inst = file(&dir, "fig4.inst", FIG4);
    assert_eq!(
        popcrit(&["oracle", s(&inst), "--budget", "3"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn certificate_is_written_and_passes() {
    let dir = TempDir::new().unwrap();
    let inst = file(&dir, "fig1.inst", FIG1);
    let cert = dir.path().join("cert.txt");
    let out = popcrit(&["solve", s(&inst), "--emit-certificate", s(&cert)]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&cert).unwrap();
    assert!(text.ends_with("SUM 0\nVERDICT PASS\n"), "{text}");
    assert!(text.lines().any(|l| l.starts_with("A:a1:1 A ")));
}

#[test]
fn trace_replay_detects_tampering() {
    let dir = TempDir::new().unwrap();
    let inst = file(&dir, "fig1.inst", FIG1);
    let trace = dir.path().join("trace.csv");
    assert_eq!(
        popcrit(&["solve", s(&inst), "--emit-trace", s(&trace)])
            .status
            .code(),
        Some(0)
    );
    let ok = popcrit(&["trace", s(&inst), s(&trace)]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("31 proposals"));

    let csv = std::fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<&str> = csv.lines().collect();
    lines.swap(3, 4);
    let bad = file(&dir, "bad.csv", &(lines.join("\n") + "\n"));
    assert_eq!(
        popcrit(&["trace", s(&inst), s(&bad)]).status.code(),
        Some(2)
    );
}

#[test]
fn malformed_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let bad = file(&dir, "bad.inst", "A a1 3 1\nPREF a1\n");
    assert_eq!(popcrit(&["solve", s(&bad)]).status.code(), Some(1));
    let missing = dir.path().join("missing.inst");
    assert_eq!(popcrit(&["solve", s(&missing)]).status.code(), Some(1));
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = popcrit(&[
        "gen",
        "--seed",
        "11",
        "--n-a",
        "4",
        "--n-b",
        "3",
        "--max-upper",
        "3",
    ]);
    let b = popcrit(&[
        "gen",
        "--seed",
        "11",
        "--n-a",
        "4",
        "--n-b",
        "3",
        "--max-upper",
        "3",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let inst = file(&dir, "gen.inst", &stdout(&a));
    for cmd in [&["solve"][..], &["oracle"][..]] {
        let args: Vec<&str> = cmd.iter().copied().chain([s(&inst)]).collect();
        assert_eq!(popcrit(&args).stdout, popcrit(&args).stdout);
    }
    let path = dir.path().join("gen2.inst");
    assert_eq!(
        popcrit(&[
            "gen",
            "--seed",
            "11",
            "--n-a",
            "4",
            "--n-b",
            "3",
            "--max-upper",
            "3",
            "-o",
            s(&path)
        ])
        .status
        .code(),
        Some(0)
    );
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
}
