use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

/// Φ(1) − 1/2.
const GAUSS_ZERO_TO_ONE: f64 = 0.341_344_746_068_542_948_585_232_545_632;

fn pfint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfint")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn backend_file(name: &str, body: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn gaussian_half_line() {
    let out = pfint(&["measure", "cyl(1, 0, inf)"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["version"], 1);
    assert_eq!((v["lo"].as_f64(), v["hi"].as_f64()), (Some(0.5), Some(0.5)));
    assert_eq!(v["converged"], true);
}

#[test]
fn doubled_indicator_integrates_to_twice_the_measure() {
    let out = pfint(&["integrate", "ind(cyl(1, 0, 1)) + ind(cyl(1, 0, 1))", "--eps", "1e-12"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let (lo, hi) = (v["lo"].as_f64().unwrap(), v["hi"].as_f64().unwrap());
    let want = 2.0 * GAUSS_ZERO_TO_ONE;
    assert!(lo - 1e-12 <= want && want <= hi + 1e-12, "[{lo}, {hi}]");
}

#[test]
fn approximating_pi_at_level_two() {
    let out = pfint(&["approx", "const(3.141592653589793)", "--level", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let parts = v["parts"].as_array().unwrap();
    assert_eq!(parts.len(), 1);
    assert_eq!(parts[0]["set"], "1");
    assert_eq!(parts[0]["value"], "2");
}

#[test]
fn syntax_errors_carry_a_position() {
    let out = pfint(&["measure", "cyl(n, 0, 1)"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "syntax");
    assert_eq!((v["error"]["line"].as_u64(), v["error"]["column"].as_u64()), (Some(1), Some(5)));
    let out = pfint(&["integrate", "ind(cyl(1, 0, 1)"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_backends_are_rejected() {
    let missing = pfint(&["--backend", "/nonexistent/backend.json", "measure", "1"]);
    assert_eq!(missing.status.code(), Some(4));
    let skew = backend_file("bad_skew.json", r#"{"type":"skew","delta":[0.8,0.6]}"#);
    let out = pfint(&["--backend", skew.to_str().unwrap(), "measure", "1"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["error"]["kind"], "backend");
}

#[test]
fn unconverged_integral_reports_bounds() {
    let unit = backend_file("unit.json", r#"{"type":"classical","space":"unit"}"#);
    let out = pfint(&["--backend", unit.to_str().unwrap(), "integrate", "coord(1)", "--level", "4", "--bound", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["converged"], false);
    let (lo, hi) = (v["lo"].as_f64().unwrap(), v["hi"].as_f64().unwrap());
    assert!(lo <= 0.5 && 0.5 <= hi && hi - lo <= 1.0 / 8.0, "[{lo}, {hi}]");
}

#[test]
fn json_file_matches_stdout() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("out.json");
    let out = pfint(&["--json", path.to_str().unwrap(), "measure", "cyl(2, -inf, 0) & cyl(1, 0, inf)"]);
    assert_eq!(out.status.code(), Some(0));
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written, json(&out));
    assert_eq!(written["lo"].as_f64(), Some(0.25));
}

#[test]
fn selftest_is_deterministic_and_flags_corruption() {
    let finite = backend_file(
        "finite.json",
        r#"{"type":"classical","space":"finite","weights":["1/4","1/4","1/8","3/8"]}"#,
    );
    let b = finite.to_str().unwrap();
    let first = pfint(&["--backend", b, "--seed", "5", "selftest"]);
    let second = pfint(&["--backend", b, "--seed", "5", "selftest"]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(json(&first)["passed"], true);
    let bad = pfint(&["--backend", b, "--seed", "5", "selftest", "--corrupt"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["passed"], false);
}
