use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn asymcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asymcap"))
        .args(args)
        .env_remove("ASYMCAP_THREADS")
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn capacity_reference_values() {
    let v = json_stdout(&asymcap(&["capacity", "--p1", "0.1", "--p2", "0.1"]));
    // 1 - H(0.18) and H(0.18) - H(0.1), 40-digit evaluations
    assert!((v["capacity"].as_f64().unwrap() - 0.3199229542717202).abs() < 1e-12);
    assert!((v["gap"].as_f64().unwrap() - 0.2110814521389986).abs() < 1e-12);
    assert_eq!(v["argmax_px"], serde_json::json!([0.5, 0.5]));
    assert_eq!(v["config"]["p1"], 0.1);
}

#[test]
fn invalid_arguments_exit_with_usage_code() {
    for args in [
        &["capacity", "--p1", "1.5", "--p2", "0"][..],
        &["capacity", "--p1", "0.1"],
        &["capacity", "--p1", "abc", "--p2", "0"],
        &["collision", "--messages", "4", "--collide", "1", "--n", "8", "--p1", "0", "--p2", "0", "--trials", "5"],
        &["collision", "--messages", "4", "--collide", "5", "--n", "8", "--p1", "0", "--p2", "0", "--trials", "5"],
        &["simulate", "--n", "8", "--messages", "4", "--p1", "0", "--p2", "0", "--trials", "0"],
        &["simulate", "--n", "8", "--messages", "4", "--p1", "0", "--p2", "0", "--trials", "5", "--decoder", "typ", "--epsilon", "0"],
    ] {
        let out = asymcap(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn thread_cap_must_be_positive() {
    let out = Command::new(env!("CARGO_BIN_EXE_asymcap"))
        .args(["capacity", "--p1", "0", "--p2", "0"])
        .env("ASYMCAP_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn general_capacity_examples() {
    let dir = tempfile::tempdir().unwrap();
    let bsc = write(dir.path(), "bsc.txt", "0.89 0.11\n0.11 0.89\n");
    let id = write(dir.path(), "id.txt", "# no perturbation\n1 0\n\n0 1\n");
    let v = json_stdout(&asymcap(&["capacity-general", "--channel", &bsc, "--perturb", &id]));
    // 1 - H(0.11)
    assert!((v["optimize"]["capacity"].as_f64().unwrap() - 0.500084041835472).abs() < 1e-6);
    assert!(v["difference"].as_f64().unwrap().abs() < 2e-3);

    let useless = write(dir.path(), "useless.txt", "0.3 0.7\n0.3 0.7\n0.3 0.7\n");
    let id3 = write(dir.path(), "id3.txt", "1 0 0\n0 1 0\n0 0 1\n");
    let v = json_stdout(&asymcap(&["capacity-general", "--channel", &useless, "--perturb", &id3]));
    assert!(v["optimize"]["capacity"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["grid"]["capacity"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn general_capacity_skips_grid_beyond_three_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let id4 = write(dir.path(), "id4.txt", "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n");
    let v = json_stdout(&asymcap(&["capacity-general", "--channel", &id4, "--perturb", &id4]));
    assert!((v["optimize"]["capacity"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!(v["grid"].is_null());
}

#[test]
fn malformed_matrices_name_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.txt", "0.9 0.1\n0.1 0.9\n");
    let cases = [
        ("not_stochastic.txt", "0.9 0.1\n0.5 0.6\n", "row 1"),
        ("ragged.txt", "0.9 0.1\n1\n", "row 1"),
        ("garbage.txt", "0.9 x\n0.1 0.9\n", "line 1"),
    ];
    for (name, text, needle) in cases {
        let bad = write(dir.path(), name, text);
        let out = asymcap(&["capacity-general", "--channel", &bad, "--perturb", &good]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(stderr.contains(needle), "{name}: {stderr}");
    }
    let three = write(dir.path(), "three.txt", "1 0\n0 1\n0.5 0.5\n");
    let out = asymcap(&["capacity-general", "--channel", &three, "--perturb", &good]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_report_fields_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.json");
    let status = asymcap(&[
        "simulate", "--n", "32", "--messages", "8", "--p1", "0.05", "--p2", "0.05", "--trials", "500", "--seed", "4",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let mut keys: Vec<&str> = report.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    let mut expected = [
        "trials", "errors", "pe_hat", "ci95", "lambda_max_hat", "rate", "n", "M", "decoder", "epsilon", "p1", "p2",
        "seed", "elapsed_seconds",
    ];
    expected.sort_unstable();
    assert_eq!(keys, expected);
    assert_eq!(report["decoder"], "map");
    assert!(report["epsilon"].is_null());
    assert!(report["elapsed_seconds"].is_null());
    assert_eq!(report["rate"], 3.0 / 32.0);

    let sidecar: Value =
        serde_json::from_str(&std::fs::read_to_string(asymcap_cli::sidecar_path(&out)).unwrap()).unwrap();
    assert_eq!(sidecar["simulate"]["trials"], 500);
    assert_eq!(sidecar["simulate"]["decoder"], "map");
}

#[test]
fn record_time_fills_elapsed_seconds() {
    let v = json_stdout(&asymcap(&[
        "simulate", "--n", "8", "--messages", "2", "--p1", "0.1", "--p2", "0.1", "--trials", "50", "--record-time",
    ]));
    assert!(v["elapsed_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "cfg.json",
        r#"{"simulate": {"n": 16, "messages": 4, "p1": 0.1, "p2": 0.1, "trials": 300, "seed": 8, "decoder": "typ", "epsilon": 0.2}}"#,
    );
    let v = json_stdout(&asymcap(&["--config", &config, "simulate", "--trials", "100"]));
    assert_eq!(v["trials"], 100);
    assert_eq!(v["n"], 16);
    assert_eq!(v["decoder"], "typ");
    assert_eq!(v["epsilon"], 0.2);

    let bad = write(dir.path(), "bad.json", r#"{"capacity": {"p1": 0.1, "p3": 0.2}}"#);
    let out = asymcap(&["--config", &bad, "capacity", "--p2", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_writes_report_and_signals_failure() {
    let dir = tempfile::tempdir().unwrap();
    let ok = dir.path().join("ok.json");
    let out = asymcap(&["verify", "--samples", "100000", "--tv-threshold", "0.02", "--out", ok.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&ok).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["config"]["grid_step"], 0.1);

    let bad = dir.path().join("bad.json");
    let out = asymcap(&["verify", "--corrupt-joint", "--samples", "1000", "--out", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&bad).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
    let markov = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "markov_u_v_y").unwrap();
    assert_eq!(markov["pass"], false);
}

#[test]
fn sweep_capacity_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("surface.csv");
    let status = asymcap(&["sweep", "--mode", "capacity", "--grid-step", "0.1", "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 36);
    assert_eq!(lines[0], "p1,p2,capacity,gap");
    assert_eq!(lines[1], "0,0,1,0");
    assert!(csv.ends_with('\n') && !csv.contains('\r'));
    let sidecar: Value =
        serde_json::from_str(&std::fs::read_to_string(asymcap_cli::sidecar_path(&out)).unwrap()).unwrap();
    assert_eq!(sidecar["sweep"]["mode"], "capacity");
}

#[test]
fn sweep_simulation_budget_is_enforced() {
    let out = asymcap(&[
        "sweep", "--mode", "simulation", "--n", "16,64", "--messages", "1024", "--trials", "10000", "--budget",
        "200000000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n = 64, M = 1024"));
}

#[test]
fn collision_reports_bound_and_exit_status() {
    let v = json_stdout(&asymcap(&[
        "collision", "--messages", "2", "--collide", "2", "--n", "16", "--p1", "0", "--p2", "0", "--trials", "1000",
    ]));
    assert!(v["lambda_max_hat"].as_f64().unwrap() >= 0.5);
    assert_eq!(v["bound"], 0.5);
    assert_eq!(v["pass"], true);

    // the bound holds even when the decoder codebook carries no information
    let v = json_stdout(&asymcap(&[
        "collision", "--messages", "4", "--collide", "2", "--n", "16", "--p1", "0.05", "--p2", "0.5", "--trials", "4000",
        "--seed", "6",
    ]));
    assert!(v["lambda_max_hat"].as_f64().unwrap() >= 0.5 - v["slack"].as_f64().unwrap());
}
