use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fpa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const UNIFORM_PAIR: &str =
    r#"{"bidders":[{"kind":"uniform","lo":0.0,"hi":1.0},{"kind":"uniform","lo":0.0,"hi":1.0}]}"#;

fn repo_instance(name: &str) -> String {
    format!("{}/../../instances/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn constant_clears_target() {
    let out = fpa(&["constant"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["phi"].as_f64().unwrap() >= 0.743);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["command"].as_str().unwrap().starts_with("fpa constant"));
}

#[test]
fn ell_table_is_csv() {
    let out = fpa(&["ell-table", "--points", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "q,ell,argmin_r");
    assert_eq!(lines.len(), 4);
}

#[test]
fn verify_half_bidding() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.json", UNIFORM_PAIR);
    let strat = write(dir.path(), "half.csv", "value,bid\n0,0\n1,0.5\n");
    let out = fpa(&[
        "verify",
        "--instance",
        inst.to_str().unwrap(),
        "--strategies",
        strat.to_str().unwrap(),
        "--tol",
        "1e-4",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(json(&out)["residual"].as_f64().unwrap() < 1e-4);
}

#[test]
fn verify_fails_on_truthful_bids() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.json", UNIFORM_PAIR);
    let strat = write(dir.path(), "truth.csv", "value,bid\n0,0\n1,1\n");
    let out = fpa(&[
        "verify",
        "--instance",
        inst.to_str().unwrap(),
        "--strategies",
        strat.to_str().unwrap(),
        "--tol",
        "1e-3",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[verify]"));
}

#[test]
fn solve_writes_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sol");
    let out = fpa(&[
        "solve",
        "--instance",
        &repo_instance("uniform-weak-strong"),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("solution.json")).unwrap()).unwrap();
    assert!((summary["b_bar"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-6);
    for i in 0..2 {
        let csv = fs::read_to_string(out_dir.join(format!("strategy-{i}.csv"))).unwrap();
        assert!(csv.starts_with("value,bid\n"));
    }
    let verify = fpa(&[
        "verify",
        "--instance",
        &repo_instance("uniform-weak-strong"),
        "--strategies",
        out_dir.join("strategy-0.csv").to_str().unwrap(),
        out_dir.join("strategy-1.csv").to_str().unwrap(),
        "--tol",
        "1e-3",
    ]);
    assert_eq!(verify.status.code(), Some(0));
}

#[test]
fn single_bidder_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "one.json",
        r#"{"bidders":[{"kind":"uniform","lo":0.0,"hi":1.0}]}"#,
    );
    let out = fpa(&["solve", "--instance", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[load instance]"));
}

#[test]
fn malformed_inputs_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "bad.json", "{\"bidders\": [");
    let out = fpa(&["solve", "--instance", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let good = write(dir.path(), "inst.json", UNIFORM_PAIR);
    let strat = write(dir.path(), "bad.csv", "value,bid\n0,zero\n1,0.5\n");
    let out = fpa(&[
        "verify",
        "--instance",
        good.to_str().unwrap(),
        "--strategies",
        strat.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_file_and_seed_exit_two() {
    let out = fpa(&["solve", "--instance", "/nonexistent/instance.json"]);
    assert_eq!(out.status.code(), Some(2));
    let inst = repo_instance("uniform-pair");
    let out = fpa(&["poa", "--instance", &inst]);
    assert_eq!(out.status.code(), Some(2));
    let out = fpa(&["audit", "--instance", &inst]);
    assert_eq!(out.status.code(), Some(2));
    let out = fpa(&["constant", "--grid", "not-a-number"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn poa_reruns_are_identical() {
    let inst = repo_instance("uniform-weak-strong");
    let args = [
        "poa",
        "--instance",
        &inst,
        "--seed",
        "11",
        "--samples",
        "50000",
    ];
    let a = fpa(&args);
    let b = fpa(&args);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, b.stdout);
    let c = fpa(&[
        "--threads",
        "1",
        "poa",
        "--instance",
        &inst,
        "--seed",
        "11",
        "--samples",
        "50000",
    ]);
    assert_eq!(a.stdout, c.stdout);
    let v = json(&a);
    assert_eq!(v["seed"], 11);
    let ratio = v["ratio"].as_f64().unwrap();
    assert!(ratio > 0.97 && ratio <= 1.0 + 3.0 * v["ci"].as_f64().unwrap());
}

#[test]
fn poa_quadrature_on_symmetric_pair() {
    let inst = repo_instance("uniform-pair");
    let out = fpa(&["poa", "--instance", &inst, "--method", "quadrature"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert!((v["opt"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-8);
    assert!((v["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-4);
}

#[test]
fn audit_passes_at_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("audit.json");
    let out = fpa(&[
        "audit",
        "--instance",
        &repo_instance("uniform-weak-strong"),
        "--seed",
        "5",
        "--samples",
        "50000",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    for key in ["lemma_a", "lemma_b", "lemma_c", "lemma_d"] {
        assert_eq!(v[key]["violations"], 0, "{key}");
    }
}

#[test]
fn asymmetric_triple_is_unsupported() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "tri.json",
        r#"{"bidders":[{"kind":"uniform","lo":0.0,"hi":1.0},{"kind":"uniform","lo":0.0,"hi":2.0},{"kind":"uniform","lo":0.0,"hi":1.0}]}"#,
    );
    let out = fpa(&["solve", "--instance", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[solve]"));
}
