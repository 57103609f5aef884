use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gnlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gnlab")).args(args).env_remove("GNLAB_SEED").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn params_solves_p() {
    let out = gnlab(&["params", "--j", "2", "--m", "3", "--ks", "0,1,2", "--q", "2", "--r", "inf", "--theta", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["params"]["p"], 12);
    assert_eq!(v["result"]["residual"]["general"], 0);
    assert_eq!(v["result"]["params"]["r"], "inf");
}

#[test]
fn check_generalized_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = gnlab(&["check", "generalized", "--function", "bumpchi", "--preset", "cor7", "--N", "4097", "--out", d]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    for key in ["version", "config", "seed", "n", "tolerances"] {
        assert!(!v[key].is_null(), "{key} missing");
    }
    assert_eq!(v["n"], 4097);
    assert!(v["result"]["report"]["ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn argument_errors_exit_2() {
    for args in [
        &["control", "scaling", "--p", "7", "--a", "0.3", "--eps", "1e-2:1e-4"][..],
        &["control", "scaling", "--p", "7", "--a", "0.3", "--eps", "1e-2:abc:5"],
        &["frobnicate"],
        &["params", "--j", "2"],
        &["check", "generalized", "--preset", "nope"],
        &["control", "obstruction", "--p", "11"],
    ] {
        let out = gnlab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn violations_exit_1() {
    let out = gnlab(&["control", "formula", "--p", "3", "--steps", "256", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = gnlab(&["control", "scaling", "--p", "7", "--a", "0", "--eps", "1e-2:1e-3:3", "--steps", "512", "--out", d]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(Path::new(d).join("scaling.csv")).unwrap();
    assert!(text.starts_with("eps,x4,sign\n"));
    assert_eq!(text.lines().count(), 4);
    assert!(!text.contains('\r'));

    let grid = dir.path().join("grid.json");
    std::fs::write(&grid, "[]").unwrap();
    let g = format!("@{}", grid.display());
    let out = gnlab(&["estimate", "--grid", &g, "--N", "257", "--out", d]);
    assert_eq!(out.status.code(), Some(0));
    let sweep = std::fs::read_to_string(Path::new(d).join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 1);
}

#[test]
fn seed_comes_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_gnlab"))
        .args(["corpus", "list", "--deterministic"])
        .env("GNLAB_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(json(&out)["seed"], 42);
    assert!(json(&out).get("generated_at_unix").is_none());
}
