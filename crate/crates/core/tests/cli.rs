use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_fermi-klein");

fn input(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "specs", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("FERMI_KLEIN_TOLERANCE").output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn failed_checks(v: &Value) -> Vec<(String, Value)> {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| (c["check"].as_str().unwrap().to_string(), c["residual"].clone()))
        .collect()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn counterexample_passes_seven_checks() {
    let out = run(&["counterexample"]);
    assert_eq!(code(&out), 0);
    let v = report(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 7);
}

#[test]
fn noisy_counterexample_fails_with_named_check() {
    let out = run(&["counterexample", "--noise", "1e-6"]);
    assert_eq!(code(&out), 1);
    let failed = failed_checks(&report(&out));
    assert!(failed.iter().any(|(name, r)| name == "commutator_identity" && r.as_f64().unwrap() > 1e-8));
}

#[test]
fn valid_algebra_checks_clean() {
    for target in [input("m2.json"), input("abelian_swap.json"), "builtin:m2+m2".to_string()] {
        let out = run(&["check", &target]);
        assert_eq!(code(&out), 0, "{target}");
    }
}

#[test]
fn non_involutive_grading_exits_one() {
    let out = run(&["check", &input("m2_not_involutive.json")]);
    assert_eq!(code(&out), 1);
    let failed = failed_checks(&report(&out));
    assert!(failed.iter().any(|(name, r)| name == "grading_involution" && r.is_number()));
}

#[test]
fn klein_on_outer_leg_reports_grading_not_inner() {
    let out = run(&["klein", &input("abelian_product.json")]);
    assert_eq!(code(&out), 1);
    let v = report(&out);
    assert_eq!(v["error"]["kind"], "GradingNotInner");
    assert!(!failed_checks(&v).is_empty());
}

#[test]
fn klein_on_m2_passes_with_compatibility() {
    let out = run(&["klein", &input("m2_product.json")]);
    assert_eq!(code(&out), 0);
    let v = report(&out);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["check"].as_str().unwrap()).collect();
    for expected in ["bijectivity", "multiplicativity", "star_preservation", "grading_equivariance", "compatibility"] {
        assert!(names.contains(&expected), "{expected} missing from {names:?}");
    }
}

#[test]
fn products_report_dimensions() {
    let fermi = report(&run(&["fermi", &input("abelian_product.json"), "--n", "2"]));
    assert_eq!(fermi["result"]["dim"], 4);
    assert_eq!(fermi["result"]["kind"], "fermi");
    let ordinary = report(&run(&["ordinary", &input("abelian_product.json"), "--n", "2"]));
    assert_eq!(ordinary["result"]["kind"], "ordinary");
    assert_eq!(ordinary["pass"], true);
}

#[test]
fn gns_reports_central_support() {
    let faithful = report(&run(&["gns", &input("m2_faithful_state.json")]));
    assert_eq!(faithful["result"]["gns_dim"], 4);
    assert_eq!(faithful["result"]["central_support"], true);
    let pure = report(&run(&["gns", &input("m2_pure_state.json")]));
    assert_eq!(pure["result"]["gns_dim"], 2);
    assert_eq!(pure["result"]["central_support"], false);
}

#[test]
fn symmetric_lists_every_permutation() {
    let out = run(&["symmetric", &input("m2_faithful_state.json"), "--n", "3"]);
    assert_eq!(code(&out), 0);
    let v = report(&out);
    assert_eq!(v["checks"].as_array().unwrap().len(), 6);
    assert_eq!(v["result"]["symmetric"], true);
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"ambient_dim\": 2, ").unwrap();
    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, "{\"ambient_dim\": 1, \"basis\": [[[[1.0, 0.0]]]], \"grading\": {\"kind\": \"ambient\", \"data\": [[[1.0, 0.0]]]}, \"extra\": 1}").unwrap();
    for args in [
        vec!["check".to_string(), bad.to_string_lossy().into_owned()],
        vec!["check".to_string(), unknown.to_string_lossy().into_owned()],
        vec!["gns".to_string(), "/definitely/not/here.json".to_string()],
        vec!["check".to_string(), "builtin:nope".to_string()],
        vec!["check".to_string(), input("m2.json"), "--tolerance=-1".to_string()],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = run(&args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert_eq!(report(&out)["error"]["kind"], "input");
    }
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let direct = run(&["check", &input("m2.json")]);
    let written = run(&["check", &input("m2.json"), "--out", path.to_str().unwrap()]);
    assert_eq!(code(&written), 0);
    assert!(written.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn tolerance_precedence() {
    let from_env = Command::new(BIN)
        .args(["check", "builtin:m2"])
        .env("FERMI_KLEIN_TOLERANCE", "1e-7")
        .output()
        .unwrap();
    assert_eq!(report(&from_env)["tolerance"], 1e-7);
    let flag_wins = Command::new(BIN)
        .args(["check", "builtin:m2", "--tolerance", "1e-6"])
        .env("FERMI_KLEIN_TOLERANCE", "1e-7")
        .output()
        .unwrap();
    assert_eq!(report(&flag_wins)["tolerance"], 1e-6);
    assert_eq!(report(&run(&["check", "builtin:m2"]))["tolerance"], 1e-9);
    let bad_env = Command::new(BIN).args(["check", "builtin:m2"]).env("FERMI_KLEIN_TOLERANCE", "soon").output().unwrap();
    assert_eq!(code(&bad_env), 2);
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let text = String::from_utf8(run(&["gns", &input("m2_faithful_state.json")]).stdout).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let r = v["checks"][0]["residual"].as_f64().unwrap();
    let line = text.lines().find(|l| l.contains("\"residual\"")).unwrap();
    let literal = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    assert_eq!(literal.parse::<f64>().unwrap(), r);
    let mantissa = literal.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17);
}
