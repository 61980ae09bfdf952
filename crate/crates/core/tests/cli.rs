use std::process::{Command, Output};

use serde_json::Value;
use spca::io::{from_json, read_matrix_csv, BoundRecord, InstanceRecord, RocSummary, SolutionRecord};
use spca::linalg::min_eigenvalue;

fn spca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spca")).args(args).output().expect("run spca")
}

fn stdout(args: &[&str]) -> String {
    let out = spca(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn bound_perm_pitprops() {
    let rec: BoundRecord = from_json(&stdout(&["bound", "--data", "pitprops", "--r", "2", "--kt", "5,5", "--kind", "perm"])).unwrap();
    assert!((rec.upper_bound - 0.449).abs() <= 0.01, "{}", rec.upper_bound);
    assert!(rec.raw_bound > rec.upper_bound);
}

#[test]
fn bound_identity_basic() {
    let rec: BoundRecord = from_json(&stdout(&["bound", "--data", "identity:6", "--r", "2", "--k", "4", "--kind", "basic"])).unwrap();
    assert!((rec.upper_bound - 2.0 / 6.0).abs() <= 1e-6);
    let raw: BoundRecord = from_json(&stdout(&["bound", "--data", "identity:6", "--r", "2", "--k", "4", "--kind", "basic", "--raw"])).unwrap();
    assert!((raw.upper_bound - 2.0).abs() <= 1e-5);
}

#[test]
fn bound_enumerates_allocations() {
    let v: Value = serde_json::from_str(&stdout(&[
        "bound", "--data", "pitprops", "--r", "2", "--k", "4", "--kind", "perm", "--enumerate-allocations",
    ]))
    .unwrap();
    let rows = v["rows"].as_array().unwrap();
    let get = |a: [u64; 2]| {
        rows.iter().find(|r| r["allocation"] == serde_json::json!(a)).unwrap()["upper_bound"].as_f64().unwrap()
    };
    assert!((get([3, 1]) - 0.267).abs() <= 0.005);
    assert!((get([2, 2]) - 0.295).abs() <= 0.005);
    assert_eq!(v["worst"]["allocation"], serde_json::json!([2, 2]));
}

#[test]
fn solve_alg1_pitprops() {
    let rec: SolutionRecord = from_json(&stdout(&["solve", "--data", "pitprops", "--r", "2", "--kt", "5,5", "--method", "alg1"])).unwrap();
    assert!((rec.variance_fraction - 0.429).abs() <= 0.01, "{}", rec.variance_fraction);
    assert!(rec.violation <= 1e-9);
    assert!(rec.gap.unwrap() >= 0.0);
}

#[test]
fn solve_alg2_fixed_three_components() {
    let dir = tempdir();
    let out = dir.join("sol.json");
    let o = out.to_str().unwrap();
    stdout(&["solve", "--data", "pitprops", "--r", "3", "--kt", "10,10,10", "--method", "alg2-fixed", "--out", o]);
    let rec: SolutionRecord = from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!((rec.variance_fraction - 0.651).abs() <= 0.02, "{}", rec.variance_fraction);
    assert!(rec.violation <= 0.02);
    let trace = std::fs::read_to_string(dir.join("sol.json.trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,component,lambda,objective,violation\n"));
    assert_eq!(trace.lines().count(), 1 + 100 * 3);
}

#[test]
fn solve_deflate_identity() {
    let rec: SolutionRecord = from_json(&stdout(&["solve", "--data", "identity:8", "--r", "2", "--kt", "1,1", "--method", "deflate"])).unwrap();
    assert!((rec.variance_fraction - 0.25).abs() <= 1e-9);
    assert_eq!(rec.violation, 0.0);
}

#[test]
fn synth_instance() {
    let rec: InstanceRecord = from_json(&stdout(&["synth", "--p", "6", "--ktrue", "2", "--q", "0.5", "--sigma", "0", "--seed", "1"])).unwrap();
    let rows = rec.matrix.unwrap();
    let m = nalgebra::DMatrix::from_fn(6, 6, |i, j| rows[i][j]);
    assert!(min_eigenvalue(&m) >= -1e-7);
    assert_eq!(rec.supports[0].len(), 2);

    let dir = tempdir();
    let out = dir.join("inst.json");
    stdout(&["synth", "--p", "6", "--ktrue", "2", "--q", "0.5", "--sigma", "0", "--seed", "1", "--out", out.to_str().unwrap()]);
    let rec: InstanceRecord = from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let m2 = read_matrix_csv(std::path::Path::new(&rec.matrix_path.unwrap()), None).unwrap();
    assert!((m2.matrix() - m).abs().max() <= 1e-12);
}

#[test]
fn roc_small() {
    let s = stdout(&["roc", "--p", "16", "--ktrue", "5", "--q", "0", "--seeds", "3", "--k-sweep", "1,5,16", "--method", "alg2-fixed"]);
    let rec: RocSummary = from_json(&s).unwrap();
    assert!(rec.auc > 0.5 && rec.auc <= 1.0);
    assert_eq!(rec.method, "alg2-fixed");
    let csv = stdout(&["roc", "--p", "16", "--ktrue", "5", "--q", "0", "--seeds", "3", "--k-sweep", "1,5,16", "--format", "csv"]);
    assert_eq!(csv.lines().next(), Some("k,mean_fpr,mean_tpr"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn allocs_identity_tie() {
    let csv = stdout(&["allocs", "--data", "identity:6", "--r", "2", "--k", "6", "--iterations", "5"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("allocation,asymmetry,upper_bound,objective,violation"));
    for line in lines {
        let obj: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((obj - 2.0 / 6.0).abs() <= 1e-6, "{line}");
    }
}

#[test]
fn input_errors_exit_2() {
    for args in [
        &["bound", "--data", "missing.csv", "--r", "2", "--k", "4"][..],
        &["bound", "--data", "pitprops", "--r", "2", "--k", "4", "--kind", "bogus"],
        &["bound", "--data", "pitprops", "--r", "3", "--kt", "2,2"],
        &["solve", "--data", "identity:0", "--kt", "1"],
        &["frobnicate"],
    ] {
        let out = spca(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
    }
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("spca-cli-{}-{}", std::process::id(), rand::random::<u64>()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn solve_uneven_allocation() {
    let rec: SolutionRecord = from_json(&stdout(&["solve", "--data", "pitprops", "--kt", "7,6,2", "--method", "alg2-fixed"])).unwrap();
    assert!((rec.variance_fraction - 0.595).abs() <= 0.01, "{}", rec.variance_fraction);
    assert!(rec.variance_fraction <= rec.upper_bound.unwrap() + 0.5 * rec.violation + 1e-4);
}
