use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn qlam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlam"))
        .args(args)
        .env_remove("QLAM_GATES")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn run_epr_applied() {
    let o = qlam(&["run", &fixture("epr_applied.qlam")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "1/sqrt(2)|01> + 1/sqrt(2)|10>\n");
}

#[test]
fn run_with_input() {
    let o = qlam(&["run", &fixture("epr.qlam"), "--input", "|11>"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "1/sqrt(2)|01> - 1/sqrt(2)|10>\n");
}

#[test]
fn run_requires_input_for_functions() {
    let o = qlam(&["run", &fixture("epr.qlam")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--input"));
    let o = qlam(&["run", &fixture("epr.qlam"), "--input", "|1>"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_trace_and_random_schedule() {
    let o = qlam(&["run", &fixture("epr_applied.qlam"), "--trace"]);
    let out = stdout(&o);
    let fires: Vec<&str> = out.lines().filter(|l| l.starts_with("fire")).collect();
    assert_eq!(fires, ["fire H 1", "fire CNOT 1 2"]);
    assert!(out.lines().next().unwrap().starts_with("token "));
    for seed in ["1", "2", "3"] {
        let o = qlam(&["run", &fixture("epr_applied.qlam"), "--schedule", "random", "--seed", seed]);
        assert_eq!(stdout(&o), "1/sqrt(2)|01> + 1/sqrt(2)|10>\n");
    }
}

#[test]
fn run_json() {
    let o = qlam(&["run", &fixture("swap.qlam"), "--input", "|10>", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["sigma"], serde_json::json!([2, 1]));
    assert_eq!(v["output"]["text"], "|00>");
    assert_eq!(v["output"]["qubits"], 2);
}

#[test]
fn circuit_text_and_json() {
    let o = qlam(&["circuit", &fixture("epr.qlam")]);
    assert_eq!(stdout(&o), "H 1\nCNOT 1 2\n");
    let o = qlam(&["circuit", &fixture("swap.qlam"), "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["gates"][0]["name"], "X");
    assert_eq!(v["output_order"], serde_json::json!([2, 1]));
}

#[test]
fn check_prints_derivation() {
    let o = qlam(&["check", &fixture("epr.qlam")]);
    let out = stdout(&o);
    assert!(out.starts_with("[0] (I_lolli2) ⊢ \\<x,y>. CNOT ((H x) * y) : B ⊗ B ⊸ B ⊗ B\n"));
    assert_eq!(out.lines().count(), 8);
}

#[test]
fn type_errors_exit_one() {
    let o = qlam(&["check", &fixture("nonlinear.qlam")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("variable x used twice"));
    let o = qlam(&["check", &fixture("syntax_error.qlam")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("syntax error at 2:1"));
    let o = qlam(&["check", "no/such/file.qlam"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn eval_normalizes() {
    let o = qlam(&["eval", &fixture("interference.qlam")]);
    assert_eq!(stdout(&o), "|0>\n");
    let o = qlam(&["eval", &fixture("epr.qlam")]);
    assert_eq!(stdout(&o), "1 · (\\<x,y>. CNOT ((H x) * y))\n");
    let o = qlam(&["eval", &fixture("epr_applied.qlam"), "--show-steps"]);
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("=  ")).count(), 3);
    assert!(out.ends_with("1/sqrt(2)|01> + 1/sqrt(2)|10>\n"));
}

#[test]
fn eval_step_limit() {
    let o = qlam(&["eval", &fixture("epr_applied.qlam"), "--max-steps", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mll_reports_correspondence() {
    let o = qlam(&["mll", &fixture("epr.qlam"), "--trace"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("[0] (⅋) ⊢ (α⊥ ⅋ α⊥) ⅋ (α ⊗ α)\n"));
    assert_eq!(out.lines().filter(|l| l.ends_with("-> exit")).count(), 2);
    assert!(out.contains("correspondence: ok"));
    let o = qlam(&["mll", &fixture("epr_applied.qlam"), "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["proof"]["rule"], "cut");
}

#[test]
fn custom_gate_library() {
    let o = qlam(&["run", &fixture("custom.qlam")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("MINUS"));
    let o = qlam(&["--gates", &fixture("minus.json"), "run", &fixture("custom.qlam")]);
    assert_eq!(stdout(&o), "-|1>\n");
    let o = Command::new(env!("CARGO_BIN_EXE_qlam"))
        .args(["eval", &fixture("custom.qlam")])
        .env("QLAM_GATES", fixture("minus.json"))
        .output()
        .unwrap();
    assert_eq!(stdout(&o), "-|1>\n");
}
