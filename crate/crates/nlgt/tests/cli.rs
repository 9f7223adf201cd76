//! End-to-end checks of the command-line interface and its exit codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nlgt"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn small_regression_config(horizon: f64, eta: f64, dt: f64) -> String {
    format!(
        r#"{{
  "experiment": "regression",
  "network": {{"family": "er", "n": 6, "link_prob": 0.5, "weight": 1.0, "dwell": null}},
  "nonlinearity": {{"kind": "log_quantize", "rho": 0.00390625}},
  "integrator": {{"method": "classical-rk4", "dt": {dt}, "horizon": {horizon}, "eta": {eta}, "y_init": "gradient-at-x0", "record_every": 50}},
  "seeds": {{"graph": 7, "data": 11, "x0": 13}},
  "regression_data": {{"n": 6, "m_total": 40, "m_per_node": 20, "slope": [1.0, 0.0], "intercept": 1.0, "noise_sigma": 0.1}}
}}"#
    )
}

#[test]
fn simulate_writes_outputs_and_reports() {
    let dir = std::env::temp_dir().join("nlgt_cli_simulate");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = write_config(&dir, "config.json", &small_regression_config(1.0, 2.0, 0.001));
    let out = dir.join("run");

    let output = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

    let csv = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(csv.starts_with("t,gap,consensus_err,tracking_err,lyapunov,topology_id\n"));
    assert!(out.join("summary.json").exists());
    assert!(out.join("meta.json").exists());

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["n"], 6);
    assert!(summary["final_gap"].as_f64().unwrap() < summary["initial_gap"].as_f64().unwrap());

    // identical reruns produce identical bytes
    let csv1 = csv;
    let out2 = dir.join("run2");
    let status = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap();
    assert!(status.success());
    let csv2 = std::fs::read_to_string(out2.join("trace.csv")).unwrap();
    assert_eq!(csv1, csv2);
}

#[test]
fn spectral_check_passes_on_stable_instance() {
    let dir = std::env::temp_dir().join("nlgt_cli_spectral");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = write_config(&dir, "config.json", &small_regression_config(1.0, 2.0, 0.001));
    let output = bin()
        .args(["spectral-check", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(output.status.success(), "{stdout}");
    assert!(stdout.contains("structure: OK"));
}

#[test]
fn eta_bar_prints_certificate() {
    let dir = std::env::temp_dir().join("nlgt_cli_etabar");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = write_config(&dir, "config.json", &small_regression_config(1.0, 2.0, 0.001));
    let output = bin().args(["eta-bar", "--config"]).arg(&cfg).output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("eta_bar = "));
}

#[test]
fn bad_config_exits_with_validation_code() {
    let dir = std::env::temp_dir().join("nlgt_cli_bad");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = write_config(&dir, "config.json", "{\"not\": \"a config\"}");
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn divergent_run_exits_with_code_three() {
    // a step size far beyond the stability limit blows the state up
    let dir = std::env::temp_dir().join("nlgt_cli_div");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = write_config(&dir, "config.json", &small_regression_config(50.0, 500.0, 0.1));
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(
        output.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn unknown_experiment_is_rejected() {
    let output = bin().args(["experiment", "nonsense"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}
