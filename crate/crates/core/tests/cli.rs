use std::fs;

use freud_core::cli::{main_with_args, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION};
use serde_json::Value;

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("freud").chain(args.iter().copied()))
}

#[test]
fn beta_json_round_trips_digits() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("beta.json");
    let out = path.to_str().unwrap();
    let code = run(&["beta", "--m", "2", "--t", "0", "--lambda", "-0.5", "--count", "20", "--method", "hankel", "--format", "json", "--out", out]);
    assert_eq!(code, EXIT_OK);
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["meta"]["m"], 2);
    assert_eq!(doc["meta"]["method"], "hankel");
    assert!(doc["meta"]["precision_bits"].as_u64().unwrap() >= 256);
    let data = doc["data"].as_array().unwrap();
    assert_eq!(data.len(), 20);
    let b1 = data[0]["beta"].to_string();
    assert!(b1.starts_with("3.3798912003"), "{b1}");
    // Enough digits to recover the stored binary value.
    assert!(b1.len() > 70);
}

#[test]
fn density_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("density.csv");
    let code = run(&["density", "--m", "3", "--ell", "1", "--samples", "200", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["x", "density", "a", "c"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 200);
    let c: f64 = rows[0][3].parse().unwrap();
    let mass: f64 = rows.iter().map(|r| r[1].parse::<f64>().unwrap()).sum::<f64>() * 2.0 * c / 200.0;
    assert!((mass - 1.0).abs() < 1e-3, "{mass}");
}

#[test]
fn zeros_and_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zeros.json");
    assert_eq!(run(&["zeros", "--m", "3", "--t", "1/2", "--n", "7", "--out", path.to_str().unwrap()]), EXIT_OK);
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let xs: Vec<f64> = doc["data"].as_array().unwrap().iter().map(|r| r["x"].as_f64().unwrap()).collect();
    assert_eq!(xs.len(), 7);
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
    assert!(xs[3].abs() < 1e-30);

    let path = dir.path().join("dec.csv");
    assert_eq!(run(&["decompose", "--m", "2", "--count", "3", "--format", "csv", "--out", path.to_str().unwrap()]), EXIT_OK);
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "family,n,power,coeff");
    // B_0..B_3 and R_0..R_3 have 1 + 2 + 3 + 4 coefficients each.
    assert_eq!(text.lines().count(), 1 + 2 * 10);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["beta", "--m", "1"]), EXIT_VALIDATION);
    assert_eq!(run(&["beta", "--m", "2", "--lambda", "-1"]), EXIT_VALIDATION);
    assert_eq!(run(&["beta", "--m", "2", "--t", "abc"]), EXIT_VALIDATION);
    assert_eq!(run(&["zeros", "--m", "2", "--n", "0"]), EXIT_VALIDATION);
    assert_eq!(run(&["verify", "--suite", "nonsense"]), EXIT_VALIDATION);
    assert_eq!(run(&["bogus"]), EXIT_VALIDATION);
    assert_eq!(run(&["density", "--m", "2", "--ell", "-1"]), EXIT_VALIDATION);
}

#[test]
fn verify_selected_suites() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.json");
    let code = run(&["verify", "--suite", "moments-ode,string", "--suite", "volterra", "--m", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let data = doc["data"].as_array().unwrap();
    assert_eq!(data.len(), 3);
    assert!(data.iter().all(|r| r["pass"] == true));
}

#[test]
fn numerical_failure_is_reported() {
    // Far too few bits for 60 coefficients at a fixed precision.
    assert_eq!(run(&["beta", "--m", "2", "--count", "60", "--bits", "64"]), EXIT_NUMERICAL);
    // Forward generation drifts off the stable orbit long before n = 200.
    assert_eq!(run(&["beta", "--m", "3", "--t", "1", "--count", "200", "--method", "painleve", "--out", "/dev/null"]), EXIT_NUMERICAL);
}
