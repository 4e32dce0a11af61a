//! End-to-end tests of the `qumode` binary: exit-status discipline, output
//! file layout, and a few numerical spot checks on what it writes.

use std::path::Path;
use std::process::{Command, Output};

fn qumode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qumode"))
        .args(args)
        .output()
        .expect("failed to spawn qumode")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_aggregate_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = qumode(&[
        "run",
        "--target",
        "vacuum",
        "--optimizer",
        "powell",
        "--trials",
        "2",
        "--seed",
        "7",
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("infidelity:"));
    assert!(out_dir.join("aggregate.csv").exists());
    assert!(out_dir.join("tables").is_dir());
}

#[test]
fn output_dir_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qumode"))
        .args(["run", "--target", "vacuum", "--optimizer", "powell", "--trials", "1"])
        .env("QUMODE_OUT", dir.path())
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(dir.path().join("aggregate.csv").exists());
}

#[test]
fn unknown_optimizer_exits_2() {
    let out = qumode(&["run", "--target", "vacuum", "--optimizer", "gradient-descent"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn unknown_target_exits_2() {
    let out = qumode(&["run", "--target", "bogus", "--optimizer", "powell"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn wigner_vacuum_center_is_one_over_pi() {
    let dir = tempfile::tempdir().unwrap();
    let out = qumode(&[
        "wigner",
        "--target",
        "vacuum",
        "--range",
        "2",
        "--points",
        "21",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("wigner.csv")).unwrap();
    // row closest to the origin
    let center = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            (v[0] * v[0] + v[1] * v[1], v[2])
        })
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap();
    assert!(center.0 < 1e-12);
    let inv_pi = std::f64::consts::FRAC_1_PI;
    assert!((center.1 - inv_pi).abs() < 1e-9, "W(0,0) = {}", center.1);
}

#[test]
fn wigner_rejects_bad_grid() {
    let out = qumode(&["wigner", "--target", "vacuum", "--points", "1"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

fn write_tiny_config(path: &Path) {
    std::fs::write(
        path,
        r#"
        name = "tiny"
        trials = 2
        base_seed = 3
        targets = ["vacuum"]
        optimizers = ["powell"]
    "#,
    )
    .unwrap();
}

#[test]
fn sweep_then_report_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    write_tiny_config(&config);
    let out_dir = dir.path().join("out");

    let sweep = qumode(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--parallelism",
        "2",
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(sweep.status.success(), "stderr: {}", stderr(&sweep));
    let agg1 = std::fs::read(out_dir.join("aggregate.csv")).unwrap();
    assert!(out_dir.join("trials.jsonl").exists());
    assert!(out_dir.join("resolved_config.toml").exists());

    let report = qumode(&["report", "--input-dir", out_dir.to_str().unwrap()]);
    assert!(report.status.success(), "stderr: {}", stderr(&report));
    let agg2 = std::fs::read(out_dir.join("aggregate.csv")).unwrap();
    assert_eq!(agg1, agg2);
}

#[test]
fn malformed_sweep_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "targets = [\"vacuum\"]\noptimizers = [\"powell\"]\nbogus = 1\n")
        .unwrap();
    let out = qumode(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn missing_sweep_config_fails() {
    let out = qumode(&["sweep", "--config", "/nonexistent/sweep.toml"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn report_on_empty_dir_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = qumode(&["report", "--input-dir", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
}
