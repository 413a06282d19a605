use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn twistor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistor")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write_artifact(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let o = twistor(args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::write(&path, &o.stdout).unwrap();
    path.display().to_string()
}

#[test]
fn rep_examples() {
    let o = twistor(&["rep", "--p", "1", "--q", "1", "--json"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["schema"], "twistor-report/1");
    assert_eq!(r["result"]["generators"][0], serde_json::json!([["0", "-1"], ["-1", "0"]]));
    assert_eq!(r["result"]["generators"][1], serde_json::json!([["0", "-1"], ["1", "0"]]));

    let r = json(&twistor(&["rep", "--p", "2", "--q", "3", "--json"]));
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["name"] == "omega_C = Id" && c["status"] == "pass"));
    let vol = &r["result"]["volume_complex"];
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(vol[i][j], if i == j { "1" } else { "0" });
        }
    }
}

#[test]
fn bad_flags_are_input_errors() {
    assert_eq!(code(&twistor(&["rep", "--p", "1"])), 2);
    assert_eq!(code(&twistor(&["rep", "--p", "1", "--q", "2", "--convention", "alternating"])), 2);
    assert_eq!(code(&twistor(&["rep", "--p", "0", "--q", "0"])), 2);
    assert_eq!(code(&twistor(&["spinor", "random", "--p", "1", "--q", "3"])), 2, "sampling without --seed");
}

#[test]
fn help_documents_exit_codes() {
    let o = twistor(&["--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for line in ["0  success", "2  input error", "3  a check failed", "4  unsupported signature"] {
        assert!(text.contains(line), "{line} missing from --help");
    }
}

#[test]
fn half_spinors_in_33_are_pure() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_artifact(dir.path(), "s.json", &["spinor", "random", "--p", "3", "--q", "3", "--convention", "alternating", "--real", "--half", "minus", "--seed", "11"]);
    let o = twistor(&["spinor", "analyze", "--spinor", &s, "--degrees", "0,1", "--json"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["result"]["pure"], true);
    assert_eq!(r["result"]["ker_dim"], 3);
    assert_eq!(r["result"]["case_label"], "pure");
    assert_eq!(r["inputs"][0]["path"], s.as_str());
}

#[test]
fn null_spinor_in_43_is_pure() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_artifact(dir.path(), "s.json", &["spinor", "random", "--p", "4", "--q", "3", "--convention", "alternating", "--null", "--seed", "5"]);
    let r = json(&twistor(&["spinor", "analyze", "--spinor", &s, "--orbit", "--json"]));
    assert_eq!(r["result"]["norm"], serde_json::json!([0, 1, 0, 1]));
    assert_eq!(r["result"]["pure"], true);
    assert_eq!(r["status"], "pass");
}

#[test]
fn zero_spinor_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.json");
    std::fs::write(&path, r#"{"signature":{"p":1,"q":1,"eps":[-1,1]},"coeffs":[[0,1,0,1],[0,1,0,1]]}"#).unwrap();
    let o = twistor(&["spinor", "analyze", "--spinor", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("zero spinor"));
}

#[test]
fn orbit_predicates_need_a_supported_signature() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_artifact(dir.path(), "s.json", &["spinor", "random", "--p", "1", "--q", "3", "--seed", "2"]);
    assert_eq!(code(&twistor(&["spinor", "analyze", "--spinor", &s, "--orbit"])), 4);
    assert_eq!(code(&twistor(&["spinor", "analyze", "--spinor", &s])), 0);
}

#[test]
fn dirac_form_and_kernel_commands() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_artifact(dir.path(), "s.json", &["spinor", "random", "--p", "3", "--q", "3", "--convention", "alternating", "--real", "--kernel", "2", "--seed", "8"]);
    let r = json(&twistor(&["form", "kernel", "--spinor", &s, "--json"]));
    assert!(r["result"]["ker_dim"].as_u64().unwrap() >= 2);
    assert_eq!(r["status"], "pass");
    let r = json(&twistor(&["form", "dirac", "--spinor", &s, "--degree", "3", "--json"]));
    assert_eq!(r["result"]["form"]["degree"], 3);
    assert_eq!(r["status"], "pass");
}

#[test]
fn tractor_check_reports_residuals() {
    let o = twistor(&["tractor", "check", "--p", "1", "--q", "2", "--metricity", "--samples", "2", "--seed", "3", "--json"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    let rows = r["result"]["residuals"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|row| row["metricity"].as_f64().unwrap() < 1e-8));
    assert_eq!(code(&twistor(&["tractor", "check", "--p", "1", "--q", "1", "--metricity", "--seed", "3"])), 4);
}

#[test]
fn zeroset_without_zeros_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    // a generic spinor has no null annihilating vector
    let s = write_artifact(dir.path(), "v.json", &["spinor", "random", "--p", "1", "--q", "4", "--seed", "9"]);
    let o = twistor(&["model", "zeroset", "--p", "0", "--q", "3", "--spinor", &s, "--samples", "8", "--seed", "1", "--json"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["result"]["zeros"], serde_json::json!([]));
}

#[test]
fn zeroset_with_prescribed_zero() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_artifact(dir.path(), "v.json", &["model", "spinor", "--p", "2", "--q", "2", "--kernel", "2", "--seed", "4"]);
    let o = twistor(&["model", "zeroset", "--p", "2", "--q", "2", "--spinor", &s, "--samples", "6", "--seed", "1", "--json"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["result"]["ker_dim"], 2);
    assert!(!r["result"]["zeros"].as_array().unwrap().is_empty());
    // wrong ambient signature
    assert_eq!(code(&twistor(&["model", "zeroset", "--p", "1", "--q", "3", "--spinor", &s, "--seed", "1"])), 2);
}

#[test]
fn fixture_ricci_is_minus_four() {
    let dir = tempfile::tempdir().unwrap();
    let pm = write_artifact(dir.path(), "pm.json", &["metric", "fixture"]);
    let o = twistor(&["metric", "ricci", "--in", &pm, "--point", "0,0,0", "--oracle", "--json"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["result"]["ricci"]["dy1dy1"], serde_json::json!([-4, 1]));
    assert_eq!(r["status"], "pass");
}

#[test]
fn constraint_violation_is_a_check_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"m":1,"include_z":false,"g":{"1,1":[{"exp":[1,0],"coeff":[1,1]}]}}"#).unwrap();
    let o = twistor(&["metric", "ricci", "--in", path.to_str().unwrap(), "--point", "0,0", "--json"]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["status"], "fail");
    let o = twistor(&["metric", "ricci", "--in", path.to_str().unwrap(), "--point", "0,0,0"]);
    assert_eq!(code(&o), 2, "wrong number of coordinates");
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let pm = write_artifact(dir.path(), "pm.json", &["metric", "random", "--m", "2", "--include-z", "--seed", "3"]);
    let again = twistor(&["metric", "random", "--m", "2", "--include-z", "--seed", "3"]);
    assert_eq!(std::fs::read(&pm).unwrap(), again.stdout);
    let args = ["metric", "ricci", "--in", pm.as_str(), "--point", "1,1/2,-1,0,2", "--oracle", "--json"];
    let a = twistor(&args);
    let b = twistor(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let args = ["model", "twistor", "--p", "1", "--q", "2", "--count", "2", "--seed", "4", "--json"];
    assert_eq!(twistor(&args).stdout, twistor(&args).stdout);
}

#[test]
fn out_file_holds_the_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = twistor(&["rep", "--p", "1", "--q", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.starts_with("Cl(1,2)"));
    let r: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(r["status"], "pass");
}
