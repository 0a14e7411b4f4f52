//! End-to-end runs of the `bvqft` binary on the shipped instances.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(format!("{name}.json"))
}

/// Runs the binary and returns the exit code, stdout and parsed report.
fn run(args: &[&str], input: &Path) -> (i32, String, Value) {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = Command::new(env!("CARGO_BIN_EXE_bvqft"))
        .args(args)
        .arg(input)
        .arg("--report")
        .arg(&report)
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    (out.status.code().unwrap(), text, value)
}

fn write_variant(dir: &Path, name: &str, edit: impl Fn(&str) -> String) -> PathBuf {
    let text = std::fs::read_to_string(instance(name)).unwrap();
    let path = dir.join(format!("{name}-variant.json"));
    std::fs::write(&path, edit(&text)).unwrap();
    path
}

#[test]
fn shipped_instances_pass_every_command() {
    for name in ["point-unital", "frobenius-k0", "dgbv-lg"] {
        for cmd in ["validate", "solve", "observables", "wdvv"] {
            let (code, text, report) = run(&[cmd, "--order", "4"], &instance(name));
            assert_eq!(code, 0, "{cmd} {name}:\n{text}");
            assert_eq!(report["schema"], "bvqft-report/1");
            assert_eq!(report["command"], cmd);
            assert_eq!(report["status"], "pass");
            let names: Vec<&str> = report["ledger"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
            let unique: BTreeSet<&str> = names.iter().copied().collect();
            assert_eq!(unique.len(), names.len(), "{cmd} {name}: duplicate ledger names");
            assert!(!names.is_empty());
        }
    }
}

#[test]
fn anomaly_exits_with_code_two_and_names_kappa() {
    let (code, text, report) = run(&["solve"], &instance("anomalous-demo"));
    assert_eq!(code, 2, "{text}");
    assert_eq!(report["status"], "anomaly");
    assert!(report["error"].as_str().unwrap().contains("kappa^(1) [x*th] = [0, -1, 0, 0]"), "{report}");
    let (code, _, _) = run(&["validate"], &instance("anomalous-demo"));
    assert_eq!(code, 0);
}

#[test]
fn wdvv_without_integral_is_an_input_error() {
    let (code, text, _) = run(&["wdvv"], &instance("anomalous-demo"));
    assert_eq!(code, 3, "{text}");
}

#[test]
fn float_scalars_are_rejected_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(dir.path(), "point-unital", |t| t.replacen("\"value\": \"1\"", "\"value\": 1.0", 1));
    let (code, _, report) = run(&["validate"], &path);
    assert_eq!(code, 3);
    let err = report["error"].as_str().unwrap();
    assert!(err.contains("floating-point") && err.contains("line"), "{err}");
}

#[test]
fn broken_axiom_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    // Doubling 1·e breaks both the unit law and graded commutativity.
    let path = write_variant(dir.path(), "frobenius-k0", |t| {
        let mut v: Value = serde_json::from_str(t).unwrap();
        let entry = v["product"].as_array_mut().unwrap().iter_mut().find(|p| p["left"] == "1" && p["right"] == "e").unwrap();
        entry["value"] = Value::String("2".into());
        serde_json::to_string_pretty(&v).unwrap()
    });
    let (code, text, report) = run(&["validate"], &path);
    assert_eq!(code, 1, "{text}");
    assert_eq!(report["status"], "identity-failure");
    let failed: Vec<&Value> = report["ledger"].as_array().unwrap().iter().filter(|e| e["passed"] == false).collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|e| e["witness"].is_string()));
}

#[test]
fn reports_are_deterministic_for_a_fixed_seed() {
    let a = run(&["observables", "--order", "3", "--seed", "11"], &instance("dgbv-lg")).2;
    let b = run(&["observables", "--order", "3", "--seed", "11"], &instance("dgbv-lg")).2;
    assert_eq!(a, b);
    assert_eq!(a["seed"], 11);
}

#[test]
fn structure_tensor_does_not_depend_on_the_seed() {
    let a = run(&["solve", "--order", "4", "--seed", "1"], &instance("dgbv-lg")).2;
    let b = run(&["solve", "--order", "4", "--seed", "2"], &instance("dgbv-lg")).2;
    assert_eq!(a["data"]["A"], b["data"]["A"]);
}
