use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fastsvf"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(text) = config {
        let path = out.join("input.json");
        fs::create_dir_all(out).unwrap();
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn nugap_writes_result() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"a": {"num": [1.0], "den": [1.0]}, "b": {"num": [2.0], "den": [1.0]}}"#;
    let out = run(dir.path(), &["nugap"], Some(cfg));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("nugap.json"));
    assert!((v["value"].as_f64().unwrap() - 0.316228).abs() < 1e-6);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["sweep"], Some(r#"{"preset": "P1", "h_grid": [0.0123456]}"#));
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["sweep"], Some("{not json"));
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["sweep", "--preset", "P9"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verification_subcommands_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify-lemma1"], None);
    assert!(out.status.success());
    assert_eq!(json(&dir.path().join("lemma1.json"))["pass"], true);
    let out = run(dir.path(), &["verify-covariance"], Some(r#"{"runs": 60}"#));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(json(&dir.path().join("covariance.json"))["slope"].is_number());
}

#[test]
fn sweep_and_simulate_write_lf_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"preset": "P1", "h_grid": [0.01], "realizations": 2, "fine_step": 1e-4}"#;
    let out = run(dir.path(), &["sweep"], Some(cfg));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    assert!(csv.starts_with("preset,method,h,seed,"));
    assert!(json(&dir.path().join("summary.json"))["cells"].is_array());

    let out = run(dir.path(), &["simulate", "--preset", "P1", "--h", "0.01"], None);
    assert!(out.status.success());
    let sampled = fs::read_to_string(dir.path().join("sampled.csv")).unwrap();
    assert_eq!(sampled.lines().next(), Some("t,u1,y1"));
    assert_eq!(sampled.lines().count(), 1 + 3001);
}

#[test]
fn bode_tabulates_truth_and_models() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["bode", "--preset", "P1", "--h", "0.01"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("bode.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("omega,truth_mag_db,truth_phase_deg,m1_mag_db"), "{header}");

    // the written estimates feed straight back in as a configuration
    let estimates = fs::read_to_string(dir.path().join("estimates.json")).unwrap();
    let cfg = format!(r#"{{"truth": {{"num": [1.0], "den": [-1.0, 1.0]}}, "models": {estimates}, "per_decade": 50}}"#);
    let again = dir.path().join("again");
    let out = run(&again, &["bode"], Some(&cfg));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(again.join("bode.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 201);
}
