use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_symmheat");

fn scenario(name: &str, extra: &str) -> String {
    format!(
        r#"{{
  "name": "{name}",
  "domain": {{"kind": "flat_rectangle", "width": 1, "height": 1, "cells_per_unit": 16}},
  "f": 1,
  "g": {{"preset": "gaussian", "center": [0.4, 0.5], "width": 0.2}},
  "resolution": 256,
  "dt": 0.005,
  "times": [0.02, 0.08]{extra}
}}"#
    )
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn symmheat(out: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .args(args)
        .env_remove("SYMMHEAT_OUT")
        .output()
        .unwrap()
}

fn summary(out: &Path) -> Value {
    let text = std::fs::read_to_string(out.join("summary.json")).expect("summary is written");
    serde_json::from_str(&text).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

#[test]
fn passing_scenario_writes_csv_and_exits_zero() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "ok.json", &scenario("ok", ""));
    let out = dir.path().join("out");
    let o = symmheat(&out, &["run", config.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    let csv = std::fs::read_to_string(out.join("ok/comparison.csv")).unwrap();
    assert!(csv.starts_with("t,a,U,V,V_minus_U\n"));
    let lp = std::fs::read_to_string(out.join("ok/lp.csv")).unwrap();
    assert!(lp.starts_with("t,p,lhs,rhs,gap\n"));
    assert!(out.join("ok/report.json").exists());
    assert_eq!(summary(&out)["status"], "pass");
}

#[test]
fn negative_data_is_a_configuration_error_naming_the_field() {
    let dir = TempDir::new().unwrap();
    let bad = scenario("bad", "").replace(
        r#""g": {"preset": "gaussian", "center": [0.4, 0.5], "width": 0.2}"#,
        r#""g": "x - 0.5""#,
    );
    let config = write(dir.path(), "bad.json", &bad);
    let out = dir.path().join("out");
    let o = symmheat(&out, &["run", config.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", text(&o));
    assert!(text(&o).contains("g"), "{}", text(&o));
    let s = summary(&out);
    assert_eq!(s["status"], "config_error");
    assert!(s["error"].as_str().unwrap().contains("`g`"), "{s}");
}

#[test]
fn syntax_errors_report_the_line() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "broken.json", "{\n  \"name\": \"x\",\n  \"domain\": ]\n}");
    let out = dir.path().join("out");
    let o = symmheat(&out, &["run", config.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(summary(&out)["error"].as_str().unwrap().contains("line 3"), "{}", text(&o));
}

/// A cone disc about its apex is an equality case, so the discrete U sits
/// slightly above V and no near-zero tolerance can hold.
#[test]
fn near_zero_tolerance_fails_and_names_the_location() {
    let dir = TempDir::new().unwrap();
    let cone = r#"{"scenarios": [{
  "name": "tight",
  "domain": {"kind": "cone_polar", "angle": 3.141592653589793, "radius": 1, "radial_cells": 16, "angular_cells": 16},
  "f": 1,
  "resolution": 256,
  "dt": 0.005,
  "times": [0.02, 0.08],
  "tolerance": 1e-9
}]}"#;
    let config = write(dir.path(), "tight.json", cone);
    let out = dir.path().join("out");
    let o = Command::new(BIN)
        .arg("--out")
        .arg(&out)
        .args(["run", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 1, "{}", text(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("FAIL tight") && stdout.contains("a = ") && stdout.contains("t = "), "{stdout}");
    let s = summary(&out);
    assert_eq!(s["status"], "fail");
    assert!(s["scenarios"][0]["max_gap"]["gap"].as_f64().unwrap() > 1e-9, "{s}");
}

#[test]
fn output_is_bitwise_deterministic() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "det.json", &scenario("det", ""));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&symmheat(&a, &["run", config.to_str().unwrap()])), 0);
    assert_eq!(code(&symmheat(&b, &["run", config.to_str().unwrap()])), 0);
    for file in ["det/comparison.csv", "det/lp.csv"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap());
    }
}

#[test]
fn threads_do_not_change_results() {
    let dir = TempDir::new().unwrap();
    let suite = format!(
        "{{\"scenarios\": [{}, {}]}}",
        scenario("one", ""),
        scenario("two", "").replace("\"f\": 1", "\"f\": 0")
    );
    let config = write(dir.path(), "suite.json", &suite);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&symmheat(&a, &["run", config.to_str().unwrap()])), 0);
    assert_eq!(code(&symmheat(&b, &["--threads", "2", "run", config.to_str().unwrap()])), 0);
    for file in ["one/comparison.csv", "two/comparison.csv"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap());
    }
}

#[test]
fn config_echo_reparses_to_the_normalized_config() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "echo.json", &scenario("echo", ""));
    let out = dir.path().join("out");
    assert_eq!(code(&symmheat(&out, &["run", config.to_str().unwrap()])), 0);
    let echo = std::fs::read_to_string(out.join("config.json")).unwrap();
    let original = symmheat::scenario::SuiteConfig::parse(&std::fs::read_to_string(&config).unwrap())
        .unwrap()
        .normalized()
        .unwrap();
    let reparsed = symmheat::scenario::SuiteConfig::parse(&echo).unwrap();
    assert_eq!(reparsed, original);
    assert_eq!(reparsed.normalized().unwrap(), original);
}

#[test]
fn summary_is_written_on_every_exit_path() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    let out = dir.path().join("missing");
    assert_eq!(code(&symmheat(&out, &["run", missing.to_str().unwrap()])), 2);
    assert_eq!(summary(&out)["status"], "config_error");

    let out = dir.path().join("usage");
    assert_eq!(code(&symmheat(&out, &["frobnicate"])), 2);
    assert_eq!(summary(&out)["status"], "config_error");

    let out = dir.path().join("env");
    let config = write(dir.path(), "env.json", &scenario("env", ""));
    let o = Command::new(BIN)
        .args(["--quiet", "run", config.to_str().unwrap()])
        .env("SYMMHEAT_OUT", &out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(summary(&out)["status"], "pass");
}

#[test]
fn sweep_of_zero_data_passes_trivially() {
    let dir = TempDir::new().unwrap();
    let config = write(
        dir.path(),
        "zero.json",
        r#"{"name": "zero", "domain": {"kind": "flat_rectangle", "width": 1, "height": 1, "cells_per_unit": 8},
            "f": 0, "g": 0, "resolution": 128, "dt": 0.01, "times": [0.02, 0.04], "refinement_sweep": true}"#,
    );
    let out = dir.path().join("out");
    let o = symmheat(&out, &["sweep", config.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    let csv = std::fs::read_to_string(out.join("zero/sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("level,h,dt,max_gap_pos,equality_gap"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert_eq!(row.split(',').nth(3).unwrap().parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn sweep_without_flagged_scenarios_is_a_configuration_error() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "plain.json", &scenario("plain", ""));
    let out = dir.path().join("out");
    assert_eq!(code(&symmheat(&out, &["sweep", config.to_str().unwrap()])), 2);
    assert_eq!(summary(&out)["status"], "config_error");
}

#[test]
fn selftest_rearrangement_criterion_passes() {
    let dir = TempDir::new().unwrap();
    let o = symmheat(dir.path(), &["selftest", "--only", "7"]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    assert!(text(&o).contains("criterion 7 [PASS]"));
    assert_eq!(summary(dir.path())["criteria"][0]["passed"], true);
}

#[test]
fn selftest_catches_a_corrupted_bundled_config() {
    let dir = TempDir::new().unwrap();
    let o = symmheat(dir.path(), &["selftest", "--only", "7", "--inject", "corrupted-config"]);
    assert_eq!(code(&o), 2, "{}", text(&o));
    assert_eq!(summary(dir.path())["status"], "config_error");
}

#[test]
fn selftest_catches_a_perturbed_route() {
    let dir = TempDir::new().unwrap();
    let o = symmheat(dir.path(), &["selftest", "--only", "5", "--inject", "perturbed-route"]);
    assert_eq!(code(&o), 1, "{}", text(&o));
    assert!(text(&o).contains("criterion 5 [FAIL]"));
}

#[test]
fn unknown_criterion_is_a_configuration_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&symmheat(dir.path(), &["selftest", "--only", "9"])), 2);
}

#[test]
fn list_presets_prints_parseable_examples() {
    let o = Command::new(BIN).arg("list-presets").output().unwrap();
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    for name in ["gaussian", "eigenmode", "indicator", "polar_disc", "cone_polar", "sphere_cap"] {
        assert!(stdout.contains(name), "{name} missing from\n{stdout}");
    }
}
