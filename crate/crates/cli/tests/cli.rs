use std::process::{Command, Output};

use serde_json::Value;

fn qdepth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdepth"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn validate(text: &str) -> Value {
    let schema: Value = serde_json::from_str(qdepth_cli::REPORT_SCHEMA).unwrap();
    let report: Value = serde_json::from_str(text).unwrap();
    let v = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = v.iter_errors(&report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
    report
}

#[test]
fn every_experiment_emits_a_valid_report() {
    let runs: &[&[&str]] = &[
        &["constants"],
        &["honest-collision", "--lambda", "6", "--d", "1", "--trials", "20"],
        &["podq", "--lambda", "6", "--d", "1", "--trials", "8"],
        &["serial", "--lambda", "8", "--d", "1", "--trials", "6"],
        &["hcollision", "--lambda", "4", "--d", "1", "--trials", "6"],
        &["compressed-equiv", "--trials", "4"],
        &["extract", "--lambda", "3", "--trials", "10"],
        &["shadowlab", "--lambda", "2", "--d", "1", "--trials", "50"],
    ];
    for args in runs {
        let out = qdepth(&[&["run"], *args].concat());
        let code = out.status.code();
        assert!(
            matches!(code, Some(0) | Some(2)),
            "{args:?}: {code:?} {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let report = validate(&String::from_utf8(out.stdout).unwrap());
        assert_eq!(report["config"]["experiment"], args[0]);
        assert_eq!(report["passed"].as_bool(), Some(code == Some(0)));
    }
}

#[test]
fn podq_reports_replay_byte_for_byte() {
    let args = [
        "run", "podq", "--lambda", "10", "--d", "2", "--trials", "200", "--seed", "7",
    ];
    let a = qdepth(&args);
    let b = qdepth(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report = validate(&String::from_utf8(a.stdout).unwrap());
    assert_eq!(report["config"]["seed"].as_str().unwrap().len(), 32);
}

#[test]
fn thread_cap_does_not_change_the_report() {
    let args = [
        "run",
        "honest-collision",
        "--lambda",
        "6",
        "--trials",
        "30",
        "--seed",
        "3",
    ];
    let free = qdepth(&args);
    let capped = Command::new(env!("CARGO_BIN_EXE_qdepth"))
        .args(args)
        .env("QDEPTH_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(free.stdout, capped.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_qdepth"))
        .args(args)
        .env("QDEPTH_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn compressed_equivalence_is_exact() {
    let out = qdepth(&["run", "compressed-equiv"]);
    assert_eq!(out.status.code(), Some(0));
    let report = validate(&String::from_utf8(out.stdout).unwrap());
    assert!(report["report"]["max_tv"].as_f64().unwrap() < 1e-9);
}

#[test]
fn failed_checks_exit_with_two() {
    // four repetitions rarely land in TwoToOne, so acceptance stays far below 0.95
    let out = qdepth(&["run", "hcollision", "--lambda", "4", "--d", "0", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("check acceptance failed"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(qdepth(&["run", "nonsense"]).status.code(), Some(1));
    assert_eq!(
        qdepth(&["run", "serial", "--backend", "structured"]).status.code(),
        Some(1)
    );
    assert_eq!(qdepth(&["run", "podq", "--lambda", "40"]).status.code(), Some(1));
    assert_eq!(qdepth(&["run", "constants", "--trials", "0"]).status.code(), Some(1));
    assert_eq!(qdepth(&["--help"]).status.code(), Some(0));
}

#[test]
fn csv_and_file_output() {
    let dir = std::env::temp_dir().join(format!("qdepth-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("constants.csv");
    let out = qdepth(&["run", "constants", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("path,value\n"));
    assert!(csv.lines().any(|l| l == "report.c_4_2,2/5"));
    assert!(csv.lines().any(|l| l == "passed,true"));
    std::fs::remove_dir_all(dir).unwrap();
}
