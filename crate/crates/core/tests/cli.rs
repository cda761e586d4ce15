use std::path::PathBuf;

use drtsp::cli::run_command;
use drtsp::io::{load_instance, parse_instance};

fn instances() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let mut argv = vec!["drtsp"];
    argv.extend_from_slice(args);
    let code = run_command(argv, &mut o, &mut e);
    (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
}

fn toy() -> String {
    instances().join("toy.json").display().to_string()
}

fn binary_toy() -> String {
    instances().join("binary_toy.json").display().to_string()
}

#[test]
fn validate_toy() {
    let (code, out, _) = run(&["validate", "-i", &toy()]);
    assert_eq!(code, 0);
    assert!(!out.contains("FAIL"));
}

#[test]
fn solve_and_verify_toy() {
    let (code, out, err) = run(&["solve", "-i", &toy(), "--theta", "0.3", "--verify"]);
    assert_eq!(code, 0, "{}", err);
    assert!(out.contains("objective: 1.8\n"), "{}", out);
    assert!(out.contains("gap: 0\n"), "{}", out);

    let (code, out, _) = run(&["solve", "-i", &toy(), "--theta", "0.3", "--verify", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["objective"], 1.8);
    assert_eq!(v["gap"], 0);
}

#[test]
fn select_binary_toy() {
    let (code, out, _) = run(&["select", "-i", &binary_toy()]);
    assert_eq!(code, 0);
    assert!(out.contains("regime: BinaryConstraint\nexact: true\n"), "{}", out);
}

#[test]
fn forced_regimes() {
    let (code, _, err) = run(&["solve", "-i", &toy(), "--regime", "BinaryConstraint"]);
    assert_eq!(code, 1);
    assert!(err.contains("regime mismatch"));
    let (code, _, err) = run(&["select", "-i", &toy(), "--regime", "NoSuchRegime"]);
    assert_eq!(code, 1, "{}", err);
    let (code, out, _) = run(&["select", "-i", &toy(), "--regime", "general-linf"]);
    assert_eq!(code, 0);
    assert!(out.contains("GeneralLinf"));
}

#[test]
fn overrides_and_bad_flags() {
    let (code, out, _) = run(&["eval-zx", "-i", &toy(), "--theta", "0", "--p", "1"]);
    assert_eq!(code, 0);
    assert!(out.contains("Z(x): 1.5"), "{}", out);
    assert_eq!(run(&["eval-zx", "-i", &toy(), "--p", "0.5"]).0, 1);
    assert_eq!(run(&["eval-zx", "-i", &toy(), "--unknown"]).0, 1);
    assert_eq!(run(&["eval-zx", "-i", &binary_toy()]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn oracle_reports_gap_and_argmax() {
    let (code, out, _) = run(&["oracle", "-i", &binary_toy(), "--x", "0", "--compare", "2", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["value"], 2);
    assert_eq!(v["gap"], 0);
    assert_eq!(v["per_sample_argmax"][0]["xi_t"][0], 0);
}

#[test]
fn outputs_are_byte_stable() {
    for args in [
        vec!["solve", "-i", &toy(), "--format", "json"],
        vec!["eval-zx", "-i", &toy(), "--format", "csv"],
        vec!["flp-gen", "--seed", "4", "--variant", "Binary22", "--theta", "0.5"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a, b);
        assert_eq!(a.0, 0);
    }
}

#[test]
fn generated_instances_round_trip() {
    let dir = std::env::temp_dir().join(format!("drtsp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("flp.json");
    let p = path.display().to_string();
    assert_eq!(run(&["flp-gen", "--seed", "2", "--variant", "BinaryL1_29", "--theta", "1", "--out", &p]).0, 0);
    let (inst, amb) = load_instance(&path).unwrap();
    let text = drtsp::io::instance_to_json(&inst, &amb);
    assert_eq!(parse_instance(&text).unwrap(), (inst, amb));

    let (code, out, err) = run(&["solve", "-i", &p, "--verify", "--mps-dump", &dir.join("m.mps").display().to_string()]);
    assert_eq!(code, 0, "{}", err);
    assert!(out.contains("BinaryConstraint"));
    assert!(std::fs::read_to_string(dir.join("m.mps")).unwrap().starts_with("NAME"));

    let report = dir.join("r.json");
    assert_eq!(run(&["reformulate", "-i", &p, "--format", "json", "--out", &report.display().to_string()]).0, 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    // Five samples, each with the center and four single-site flips.
    assert_eq!(v["blocks"], 5 * 5);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn crossval_csv_header() {
    let (code, out, err) =
        run(&["crossval", "--sites", "3", "--customers", "3", "--samples", "4", "--holdout", "30", "--grid", "0,0.1", "--format", "csv"]);
    assert_eq!(code, 0, "{}", err);
    assert!(out.starts_with("theta,opt_val,time_s,built_facilities,holdout_mean,ci_low,ci_high,chosen\n"));
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn missing_field_is_named() {
    let dir = std::env::temp_dir().join(format!("drtsp-cli-missing-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let text = std::fs::read_to_string(toy()).unwrap().replace("\"W\": [[1]],", "");
    let path = dir.join("bad.json");
    std::fs::write(&path, text).unwrap();
    let (code, _, err) = run(&["validate", "-i", &path.display().to_string()]);
    assert_eq!(code, 1);
    assert!(err.contains("`W`"), "{}", err);
    std::fs::remove_dir_all(&dir).unwrap();
}
