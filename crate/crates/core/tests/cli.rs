mod common;

use std::path::Path;
use std::process::{Command, Output};

fn treeid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treeid")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn m1_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let m1 = write(dir.path(), "m1.json", common::M1);
    let out = treeid(&["identify", &m1, "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["nodes"][0]["status"], "identifiable");
    assert_eq!(v["nodes"][1]["fastp"], "σ[0,2]/σ[0,1]");
    assert_eq!(v["diagnostics"]["seed"], 7);
}

#[test]
fn output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (name, json) in [("m1.json", common::M1), ("two.json", common::TWO_BRANCH)] {
        let p = write(dir.path(), name, json);
        for fmt in ["json", "text"] {
            let a = treeid(&["identify", &p, "--seed", "7", "--format", fmt]);
            let b = treeid(&["identify", &p, "--seed", "7", "--format", fmt]);
            assert_eq!(a.status.code(), Some(0));
            assert_eq!(a.stdout, b.stdout);
        }
    }
}

#[test]
fn text_format() {
    let dir = tempfile::tempdir().unwrap();
    let m1 = write(dir.path(), "m1.json", common::M1);
    let out = treeid(&["identify", &m1, "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("λ[1,2]: identifiable = σ[0,2]/σ[0,1] [root-edge]"), "{text}");
}

#[test]
fn oracle_check_stamp() {
    let dir = tempfile::tempdir().unwrap();
    let m2 = write(dir.path(), "m2.json", common::M2);
    let out = treeid(&["identify", &m2, "--oracle-check"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["oracle_check"]["agree"], true);
    assert_eq!(v["oracle_check"]["counts"]["3"], "1");

    let two = write(dir.path(), "two.json", common::TWO_BRANCH);
    let out = treeid(&["identify", &two, "--oracle-check", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().ends_with("oracle check: agree\n"));
}

#[test]
fn oracle_check_size_guard() {
    let dir = tempfile::tempdir().unwrap();
    let parents: Vec<String> = (0..9).map(|k| k.to_string()).collect();
    let json = format!(r#"{{"n":9,"parent":[null,{}],"bidirected":[]}}"#, parents.join(","));
    let p = write(dir.path(), "big.json", &json);
    let out = treeid(&["identify", &p, "--oracle-check"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n <= 8"));
}

#[test]
fn emit_dot_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.json", common::TRIANGLE);
    let dot = dir.path().join("g.dot");
    let rep = dir.path().join("r.json");
    let out = treeid(&[
        "identify",
        &tri,
        "--emit-dot",
        dot.to_str().unwrap(),
        "-o",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let g = std::fs::read_to_string(dot).unwrap();
    assert!(g.starts_with("digraph"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(rep).unwrap()).unwrap();
    assert_eq!(v["nodes"][2]["status"], "two_identifiable");
}

#[test]
fn dot_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "m1.dot", "digraph { 0 -> 1; 1 -> 2; 1 -> 2 [dir=both]; }");
    let out = treeid(&["identify", &p, "--format", "text"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"n":2,"parent":[null,0,5],"bidirected":[]}"#);
    let out = treeid(&["identify", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of range"));
    assert_eq!(treeid(&["identify", "/nonexistent.json"]).status.code(), Some(1));
    let m1 = write(dir.path(), "m1.json", common::M1);
    assert_eq!(treeid(&["identify", &m1, "--error-prob", "2"]).status.code(), Some(1));
    assert_eq!(treeid(&["identify", &m1, "--prime", "15"]).status.code(), Some(1));
}

#[test]
fn budget_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.json", common::TRIANGLE);
    let out = treeid(&["identify", &tri, "--error-prob", "1e-300"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}
