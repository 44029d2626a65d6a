use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hansen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hansen")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Exit code and parsed `{code, message, context}` from stderr.
fn failure(out: &Output) -> (i32, Value) {
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    assert!(err["message"].is_string() && err["context"].is_string());
    (out.status.code().unwrap(), err)
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const UNIVERSE: &str = r#"{
  "kind": "universe",
  "mu": [1.162, 1.246, 1.228],
  "sigma": [[0.0146, 0.0187, 0.0145], [0.0187, 0.0854, 0.0104], [0.0145, 0.0104, 0.0289]]
}"#;

// bond and one risky asset priced by the kernel (1.2, 1.0, 0.8)
const SCENARIOS: &str = r#"{
  "kind": "scenarios",
  "probabilities": [0.25, 0.25, 0.5],
  "payoffs": [[1.0, 1.0, 1.0], [0.8, 1.1, 1.3]],
  "p": [0.95, 1.035]
}"#;

const W_TILDE: &str = "probability,value\n0.16666666666666666,-0.01\n0.5,0.01\n0.3333333333333333,0.11\n";

fn close(v: &Value, expected: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - expected).abs() <= tol
}

#[test]
fn verify_reproduces_embedded_example() {
    let json = stdout_json(&hansen(&["verify"]));
    assert_eq!(json["pass"], true);
    assert_eq!(json["periods"], 4);
    for c in json["one_period"].as_array().unwrap() {
        assert_eq!(c["within_tolerance"], true, "{c}");
        assert!(c["exact_delta"].as_f64().unwrap() < 1e-12);
    }
    let multi = json["multiperiod"].as_array().unwrap();
    assert_eq!(multi.len(), 7);
    assert!(multi.iter().all(|c| c["rounds_to_printed"] == true));
    let hr_sq_x = multi.iter().find(|c| c["name"] == "hr_sq_x_n").unwrap();
    assert!(close(&hr_sq_x["computed"], 0.8154962271794837, 1e-12));
}

#[test]
fn mhr_of_truncation_example() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "w.csv", W_TILDE);
    let json = stdout_json(&hansen(&["mhr", "--input", s(&csv), "--renormalize"]));
    assert!(close(&json["k_hat"], 0.02, 1e-12));
    assert!(close(&json["mhr"], 0.5f64.sqrt(), 1e-12));
    assert!(close(&json["msr"], 1.0, 1e-12));
    assert_eq!(json["truncated"], true);
}

#[test]
fn mhr_rejects_payoff_without_downside() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "w.csv", "0.5,1.0\n0.5,2.0\n");
    let (code, err) = failure(&hansen(&["mhr", "-i", s(&csv)]));
    assert_eq!(code, 1);
    assert_eq!(err["code"], "no_downside");
    assert_eq!(err["context"], s(&csv));

    let json = stdout_json(&hansen(&["mhr", "-i", s(&csv), "--allow-no-downside"]));
    assert!(close(&json["mhr"], 1.0, 1e-15));
    assert_eq!(json["msr"], "+inf");
}

#[test]
fn mhr_probabilities_must_sum_to_one() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "w.csv", "1,-1\n1,2\n");
    let (code, err) = failure(&hansen(&["mhr", "-i", s(&csv)]));
    assert_eq!(code, 1);
    assert_eq!(err["code"], "invalid_probabilities");
}

#[test]
fn frontier_of_risk_free_market_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let market = write(&dir, "m.json", r#"{"kind": "gram", "G": [[1.0]], "m": [1.0], "p": [1.0]}"#);
    let json = stdout_json(&hansen(&["frontier", "-i", s(&market)]));
    assert_eq!(json["degenerate"], true);
    assert!(json["frontier"].is_null());
    assert_eq!(json["hansen_bound"]["pass"], true);
}

#[test]
fn frontier_report_and_points() {
    let dir = TempDir::new().unwrap();
    let market = write(&dir, "m.json", UNIVERSE);
    let points = dir.path().join("points.csv");
    let report = dir.path().join("report.json");
    let out = hansen(&[
        "frontier",
        "-i",
        s(&market),
        "-o",
        s(&report),
        "--points-csv",
        s(&points),
        "--grid-min",
        "1.0",
        "--grid-max",
        "1.4",
        "--grid-count",
        "5",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let json: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let sp = &json["special_portfolios"];
    assert!(close(&sp["hr_sq_x"], 582_399.0 / 1_632_974.0, 1e-12));
    assert!(close(&sp["mu_z"], 1.153991671227661, 1e-11));
    assert_eq!(json["degenerate"], false);
    assert!(close(&json["frontier"]["mu_omega"]["center"], sp["mu_y"].as_f64().unwrap(), 0.0));

    let csv = fs::read_to_string(&points).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "mu,omega,sigma");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("1,"));
    // ω² − μ² = σ² on every row
    for line in &lines[1..] {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] * v[1] - v[0] * v[0] - v[2] * v[2]).abs() < 1e-12);
    }
}

#[test]
fn output_is_byte_for_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let market = write(&dir, "m.json", UNIVERSE);
    let a = hansen(&["multiperiod", "-i", s(&market), "--periods", "4"]);
    let b = hansen(&["multiperiod", "-i", s(&market), "--periods", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn multiperiod_reference_horizon() {
    let dir = TempDir::new().unwrap();
    let market = write(&dir, "m.json", UNIVERSE);
    let json = stdout_json(&hansen(&["multiperiod", "-i", s(&market), "-n", "4"]));
    let mp = &json["multiperiod"];
    assert_eq!(mp["n"], 4);
    assert!(close(&mp["hr_sq_x"], 0.8154962271794837, 1e-12));
    assert!(close(&mp["mu_y"], 0.30380986034320073, 1e-12));
    assert!(close(&json["frontier"]["mu_sigma"]["center"], 1.646632237914963, 1e-11));
    assert!(close(&json["frontier"]["mu_sigma"]["intercept"], 0.07544573250468156, 1e-12));
}

#[test]
fn multiperiod_rejects_zero_periods() {
    let dir = TempDir::new().unwrap();
    let market = write(&dir, "m.json", UNIVERSE);
    let (code, err) = failure(&hansen(&["multiperiod", "-i", s(&market), "--periods", "0"]));
    assert_eq!(code, 1);
    assert_eq!(err["code"], "invalid_horizon");
}

#[test]
fn grid_needs_two_points() {
    let dir = TempDir::new().unwrap();
    let market = write(&dir, "m.json", UNIVERSE);
    let (code, err) = failure(&hansen(&["frontier", "-i", s(&market), "--grid-count", "1"]));
    assert_eq!(code, 1);
    assert_eq!(err["code"], "invalid_grid");
}

#[test]
fn malformed_market_files() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"kind": "universe", "mu": [1.1]}"#);
    let (code, err) = failure(&hansen(&["frontier", "-i", s(&bad)]));
    assert_eq!(code, 1);
    assert_eq!(err["code"], "parse");

    let asym =
        write(&dir, "asym.json", r#"{"kind": "universe", "mu": [1.1, 1.2], "sigma": [[0.1, 0.0], [0.01, 0.1]]}"#);
    let (_, err) = failure(&hansen(&["frontier", "-i", s(&asym)]));
    assert_eq!(err["code"], "not_symmetric");
}

#[test]
fn usage_errors_are_json() {
    let (code, err) = failure(&hansen(&["frontier"]));
    assert_eq!(code, 1);
    assert_eq!(err["code"], "usage");
    assert!(hansen(&["--help"]).status.success());
}

#[test]
fn hj_bounds_with_kernels() {
    let dir = TempDir::new().unwrap();
    let market = write(&dir, "m.json", SCENARIOS);
    let kernel = write(&dir, "k.csv", "0.25,1.2\n0.25,1.0\n0.5,0.8\n");
    let json = stdout_json(&hansen(&["hj", "-i", s(&market), "--kernel", s(&kernel), "--monotone"]));
    let hr_bound = json["hr_bound"].as_f64().unwrap();
    let k = &json["kernels"][0];
    assert_eq!(k["pass"], true);
    assert!(k["hr_sq_m"].as_f64().unwrap() <= hr_bound);
    assert!(k["max_pricing_error"].as_f64().unwrap() < 1e-12);
    let mono = &json["monotone"][0];
    assert_eq!(mono["pass"], true);
    assert!(mono["sup_mhr_sq"].as_f64().unwrap() <= mono["hr_bound"].as_f64().unwrap() + 1e-10);

    let plain = stdout_json(&hansen(&["hj", "-i", s(&market)]));
    assert!(plain["kernels"].as_array().unwrap().is_empty());
    assert!(plain.get("monotone").is_none());
}

#[test]
fn hj_rejects_bad_kernels_and_options() {
    let dir = TempDir::new().unwrap();
    let market = write(&dir, "m.json", SCENARIOS);
    let wrong = write(&dir, "k.csv", "0.25,1.0\n0.25,1.0\n0.5,1.0\n");
    let (code, err) = failure(&hansen(&["hj", "-i", s(&market), "--kernel", s(&wrong)]));
    assert_eq!(code, 1);
    assert_eq!(err["code"], "not_a_kernel");

    let (_, err) = failure(&hansen(&["hj", "-i", s(&market), "--monotone"]));
    assert_eq!(err["code"], "missing_kernel");

    let (_, err) = failure(&hansen(&["hj", "-i", s(&market), "--bound-tol", "0"]));
    assert_eq!(err["code"], "invalid_tolerance");

    let universe = write(&dir, "u.json", UNIVERSE);
    let kernel = write(&dir, "k2.csv", "0.25,1.2\n0.25,1.0\n0.5,0.8\n");
    let (_, err) = failure(&hansen(&["hj", "-i", s(&universe), "--kernel", s(&kernel)]));
    assert_eq!(err["code"], "not_scenario_backed");
}
