use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn revspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revspec"))
        .args(args)
        .env("REVSPEC_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn preset_sphere_has_unit_coefficients() {
    let o = revspec(&["preset", "sphere"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["format"], "revspec-profile-v1");
    assert_eq!(v["besse"]["coeffs"], serde_json::json!([1.0]));
}

#[test]
fn preset_asym_coefficients() {
    let o = revspec(&["preset", "asym"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c: Vec<f64> = serde_json::from_value(v["besse"]["coeffs"].clone()).unwrap();
    let want = [1.7, 0.2, -0.7, -0.2];
    assert_eq!(c.len(), 4);
    for (a, b) in c.iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn unknown_preset_is_a_usage_error() {
    let o = revspec(&["preset", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sphere") && err.contains("asym"), "{err}");
}

#[test]
fn empty_profile_path_is_a_usage_error() {
    assert_eq!(revspec(&["spectrum", "", "--lambda-max", "50"]).status.code(), Some(2));
}

#[test]
fn bad_flag_is_a_usage_error() {
    assert_eq!(revspec(&["spectrum", "sphere", "--lambda-max", "abc"]).status.code(), Some(2));
}

#[test]
fn sphere_spectrum_row_count() {
    let o = revspec(&["spectrum", "sphere", "--lambda-max", "50"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 49);
}

#[test]
fn oracle_sphere_values() {
    let o = revspec(&["oracle", "sphere", "--n-max", "2", "--count", "3"]);
    assert!(o.status.success());
    let lambdas: Vec<f64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    let want = [0.0, 2.0, 6.0, 2.0, 6.0, 12.0, 6.0, 12.0, 20.0];
    assert_eq!(lambdas.len(), want.len());
    for (a, b) in lambdas.iter().zip(want) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn profile_file_roundtrips_through_spectrum() {
    let dir = tempdir().unwrap();
    let prof = dir.path().join("asym.json");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(revspec(&["preset", "asym", "--out", path_str(&prof)]).status.success());
    assert!(revspec(&["spectrum", path_str(&prof), "--lambda-max", "400", "--out", path_str(&a)])
        .status
        .success());
    assert!(revspec(&["spectrum", "asym", "--lambda-max", "400", "--out", path_str(&b)])
        .status
        .success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn sphere_lengths_are_degenerate() {
    let o = revspec(&["lengths", "sphere"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));
}

#[test]
fn sphere_trace_peaks_at_two_pi() {
    let dir = tempdir().unwrap();
    let spec = dir.path().join("s.csv");
    assert!(revspec(&["spectrum", "sphere", "--lambda-max", "2401", "--out", path_str(&spec)])
        .status
        .success());
    let o = revspec(&["trace", path_str(&spec), "--cutoff", "40", "--tmax", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ts: Vec<f64> = v["singularities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["t"].as_f64().unwrap())
        .collect();
    assert!(ts.iter().any(|t| (t - 2.0 * std::f64::consts::PI).abs() < 0.05), "{ts:?}");
}

#[test]
fn trace_rejects_insufficient_coverage() {
    let dir = tempdir().unwrap();
    let spec = dir.path().join("s.csv");
    revspec(&["spectrum", "sphere", "--lambda-max", "100", "--out", path_str(&spec)]);
    let o = revspec(&["trace", path_str(&spec), "--cutoff", "40"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reconstruct_writes_result_and_profile() {
    let dir = tempdir().unwrap();
    let spec = dir.path().join("m.csv");
    let out = dir.path().join("m.json");
    revspec(&["spectrum", "mirror", "--lambda-max", "2500", "--out", path_str(&spec)]);
    let o = revspec(&["reconstruct", path_str(&spec), "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["format"], "revspec-reconstruction-v1");
    assert!(v["grids"]["J"].as_array().unwrap().len() > 100);
    let prof = dir.path().join("m.profile.json");
    let o = revspec(&["spectrum", path_str(&prof), "--lambda-max", "20"]);
    assert!(o.status.success());
}

#[test]
fn reconstruct_from_normal_form_json() {
    let dir = tempdir().unwrap();
    let nf = dir.path().join("nf.json");
    let spec = dir.path().join("s.csv");
    revspec(&[
        "spectrum", "asym", "--lambda-max", "10", "--out", path_str(&spec), "--normal-form",
        path_str(&nf),
    ]);
    let o = revspec(&["reconstruct", path_str(&nf), "--family", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let q: Vec<f64> = serde_json::from_value(v["q"].clone()).unwrap();
    // The reflection x → −x is an isometry, so only |q₁| is determined.
    assert!((q[0] - 0.7).abs() < 1e-3 && (q[1].abs() - 0.2).abs() < 1e-3, "{q:?}");
}

#[test]
fn roundtrip_asym_passes() {
    let o = revspec(&["roundtrip", "asym", "--tol", "1e-2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
}

#[test]
fn roundtrip_failure_exits_one() {
    let o = revspec(&["roundtrip", "asym", "--tol", "1e-12"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn outputs_are_deterministic() {
    let a = revspec(&["actions", "asym", "--nodes", "9"]);
    let b = revspec(&["actions", "asym", "--nodes", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_revspec"))
        .args(["preset", "sphere"])
        .env("REVSPEC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
