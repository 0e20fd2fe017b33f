use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn opcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opcalc"))
        .args(args)
        .env_remove("OPCALC_TRUNCATION")
        .output()
        .expect("binary runs")
}

fn run_fixture(command: &str, name: &str, extra: &[&str]) -> Output {
    let path = fixture(name);
    let mut args = vec![command, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    opcalc(&args)
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_code(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    v["error"]["code"].as_str().expect("error code").to_string()
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn solve_j0_exact() {
    let out = run_fixture("solve", "j0.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["exact"], true);
    assert_eq!(v["passed"], true);
    assert_eq!(v["residual_norm"], 0.0);
    assert_eq!(v["atom_count"], 1);
    assert_eq!(v["series"]["truncation"], 64);
}

#[test]
fn solve_two_roots_leading_coefficients() {
    let out = run_fixture("solve", "two_roots.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let coeffs = v["series"]["coefficients"].as_array().unwrap();
    assert_eq!(coeffs[0][0], "1");
    assert_eq!(coeffs[1][0], "6");
    assert_eq!(v["atom_count"], 2);
}

#[test]
fn solve_order_two_nu_two() {
    let out = run_fixture("solve", "order_two_nu2.json", &["--real"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let kinds: Vec<&str> = v["solution"]["atoms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["kind"].as_str().unwrap())
        .collect();
    assert!(kinds.contains(&"I") && kinds.contains(&"J"), "{kinds:?}");
}

#[test]
fn solve_irrational_roots_falls_back_to_floating() {
    let out = run_fixture("solve", "irrational.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["exact"], false);
    assert!(v["relative_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn solve_float_problem() {
    let out = run_fixture("solve", "float_j0.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["exact"], false);
    assert_eq!(v["series"]["truncation"], 40);
}

#[test]
fn solve_forced_equation() {
    let out = run_fixture("solve", "forced.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["passed"], true);
}

#[test]
fn solve_failing_tolerance_exits_two() {
    let out = run_fixture("solve", "float_strict.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["passed"], false);
    assert_eq!(error_code(&out), "verification_failed");
}

#[test]
fn input_errors_exit_one() {
    for (name, code) in [
        ("degenerate.json", "degenerate_operator"),
        ("bad_ic_count.json", "schema"),
        ("mixed.json", "mixed_coefficients"),
        ("negative_rhs.json", "schema"),
        ("missing.json", "io"),
    ] {
        let out = run_fixture("solve", name, &[]);
        assert_eq!(out.status.code(), Some(1), "{name}");
        assert_eq!(error_code(&out), code, "{name}");
        assert!(out.stdout.is_empty(), "{name}");
    }
}

#[test]
fn malformed_json_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"nu\": 0, ").unwrap();
    let out = opcalc(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "invalid_json");
}

#[test]
fn truncation_from_environment() {
    let path = fixture("j0.json");
    let out = Command::new(env!("CARGO_BIN_EXE_opcalc"))
        .args(["solve", path.to_str().unwrap()])
        .env("OPCALC_TRUNCATION", "12")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["series"]["truncation"], 12);

    let file_wins = Command::new(env!("CARGO_BIN_EXE_opcalc"))
        .args(["solve", fixture("float_j0.json").to_str().unwrap()])
        .env("OPCALC_TRUNCATION", "12")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&file_wins)["series"]["truncation"], 40);
}

#[test]
fn truncation_below_order_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.json");
    std::fs::write(
        &path,
        r#"{"nu": 0, "operator": ["2", "-3", "1"], "initial_conditions": ["1", "0"], "truncation": 1}"#,
    )
    .unwrap();
    let out = opcalc(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "schema");
}

#[test]
fn eval_j0_at_points() {
    let out = run_fixture("eval", "j0.json", &["--t", "0,1,2.5"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["t", "value", "bound"]);
    let expected = [1.0, 0.765_197_686_557_966_6, -0.048_383_776_468_197_99];
    for (row, want) in rows[1..].iter().zip(expected) {
        let got: f64 = row[1].parse().unwrap();
        let bound: f64 = row[2].parse().unwrap();
        assert!((got - want).abs() <= 1e-14, "{got} vs {want}");
        assert!((0.0..1e-12).contains(&bound));
    }
}

#[test]
fn eval_range_includes_endpoints() {
    let out = run_fixture("eval", "two_roots.json", &["--range", "0:2:5"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 6);
    let ts: Vec<f64> = rows[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ts, [0.0, 0.5, 1.0, 1.5, 2.0]);
}

#[test]
fn eval_with_real_form_matches_complex_form() {
    let complex = csv_rows(&run_fixture("eval", "order_two_nu2.json", &["--t", "0.7"]));
    let real = csv_rows(&run_fixture("eval", "order_two_nu2.json", &["--t", "0.7", "--real"]));
    let a: f64 = complex[1][1].parse().unwrap();
    let b: f64 = real[1][1].parse().unwrap();
    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
}

#[test]
fn eval_usage_errors() {
    for extra in [&[][..], &["--range", "0:1"][..], &["--range", "0:1:0"][..], &["--t", "x"][..]] {
        let out = run_fixture("eval", "j0.json", extra);
        assert_eq!(out.status.code(), Some(1), "{extra:?}");
        assert_eq!(error_code(&out), "usage", "{extra:?}");
    }
}

#[test]
fn eval_negative_t_is_a_domain_failure() {
    let out = run_fixture("eval", "j0.json", &["--t", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "solve");
}

#[test]
fn verify_accepts_correct_series() {
    let path = fixture("j0_series.json");
    let out = run_fixture("verify", "j0.json", &[path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["residual_norm"], 0.0);
}

#[test]
fn verify_rejects_wrong_series() {
    let path = fixture("wrong_series.json");
    let out = run_fixture("verify", "j0.json", &[path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["passed"], false);
    assert_eq!(error_code(&out), "verification_failed");
}

#[test]
fn verify_negative_valuation_exits_two() {
    let path = fixture("negative_series.json");
    let out = run_fixture("verify", "j0.json", &[path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "negative_valuation");
}

#[test]
fn table_substitutes_nu() {
    let out = opcalc(&["table", "--nu", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = stdout_json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for row in rows {
        for key in ["function", "transform_numerator", "transform_denominator", "nu_dependence"] {
            assert!(row[key].is_string(), "{key} in {row}");
        }
    }
    assert!(rows.iter().any(|r| r["transform_numerator"] == "lambda B"));
}

#[test]
fn unknown_command_and_help() {
    let out = opcalc(&["bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "usage");
    let help = opcalc(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("solve"));
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["solve", "order_two_nu2.json"],
        vec!["solve", "irrational.json"],
        vec!["eval", "irrational.json", "--range", "0:3:7"],
    ] {
        let run = || run_fixture(args[0], args[1], &args[2..]);
        let first = run();
        let second = run();
        assert_eq!(first.stdout, second.stdout, "{args:?}");
        assert_eq!(first.status.code(), second.status.code());
    }
}
