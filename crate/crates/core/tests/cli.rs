//! Command-line workflow and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vasicek-gp"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn simulate_calibrate_predict_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = run(d, &["simulate", "--n-points", "60", "--seed", "4", "--out", "s.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("s.json").exists());

    let o = run(d, &["calibrate", "--input", "s.csv", "--seed", "1", "--format", "json", "--out", "fit.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fit: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("fit.json")).unwrap()).unwrap();
    assert!(fit["final_nll"].is_number());

    let o = run(d, &["predict", "--input", "s.csv", "--params", "fit.json", "--prefix", "30", "--out", "band.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let band = std::fs::read_to_string(d.join("band.csv")).unwrap();
    assert!(band.starts_with("t,curve,mean,lower,upper"));
    assert_eq!(band.lines().count(), 61);

    let o = run(d, &["metrics", "--input", "s.csv", "--params", "fit.json", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["msll"].as_f64().unwrap() < 0.0);
}

#[test]
fn experiment_writes_its_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("exp.toml"), "[grid]\nn_points = 30\ndt = 0.03\nmaturity = 0.93\n").unwrap();
    let o = run(
        d,
        &["experiment", "--config", "exp.toml", "--n-runs", "3", "--threads", "2", "--seed", "9", "--out", "out"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["summary.json", "params.csv", "hist_kappa.csv"] {
        assert!(d.join("out").join(f).exists(), "missing {f}");
    }
}

#[test]
fn usage_and_config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(d, &["frobnicate"])), 1);
    assert_eq!(code(&run(d, &["simulate", "--format", "xml"])), 1);
    std::fs::write(d.join("bad.toml"), "[grid]\nbogus = 1\n").unwrap();
    assert_eq!(code(&run(d, &["simulate", "--config", "bad.toml"])), 1);
    assert_eq!(code(&run(d, &["simulate", "--config", "missing.toml"])), 1);
    assert_eq!(code(&run(d, &["--help"])), 0);
}

#[test]
fn runtime_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.csv"), "t,logP_zero\n0.1,-0.5\n0.2,oops\n").unwrap();
    let o = run(d, &["calibrate", "--input", "bad.csv", "--maturity", "1.0"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("3"));
    assert_eq!(code(&run(d, &["calibrate", "--input", "absent.csv", "--maturity", "1.0"])), 2);
}
