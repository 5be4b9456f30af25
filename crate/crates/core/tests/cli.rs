use std::fs;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phicaloric")).args(args).output().unwrap()
}

fn small_config(dir: &std::path::Path) -> String {
    let text = r#"{
      "name": "small",
      "phi": {"kind": "power", "p": 3.0},
      "grid": {"n": 2, "lower": [0, 0], "upper": [1, 1], "cells": [16, 16], "dt": 0.01, "t_end": 0.1},
      "runs": [{"id": "eig", "preset": {"name": "eigenmode", "modes": [1]}, "amplitude": 2.0}],
      "cylinders": [{"id": "A", "t0": 0.1, "x0": [0.5, 0.5], "R": 0.15, "alpha": {"policy": "fixed", "value": 1.0}}],
      "checks": [
        {"check": "main_bound"},
        {"check": "cutoffs", "k_max": 3}
      ]
    }"#;
    let path = dir.join("small.json");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn list_presets_names_barenblatt() {
    let out = cli(&["list-presets"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("barenblatt"));
}

#[test]
fn describe_known_and_unknown_checks() {
    let out = cli(&["describe-check", "verify_main_bound"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("main theorem"));
    assert_eq!(cli(&["describe-check", "nope"]).status.code(), Some(2));
}

#[test]
fn config_without_growth_function_exits_with_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, r#"{"name": "x", "grid": {"n": 1, "lower": [0], "upper": [1], "cells": [8], "dt": 0.1, "t_end": 0.1}}"#).unwrap();
    let out = cli(&["check", "--config", path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("phi"));
}

#[test]
fn check_without_config_is_a_usage_error() {
    assert_eq!(cli(&["check"]).status.code(), Some(2));
}

#[test]
fn check_writes_reports_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let csv_dir = dir.path().join("csv");
    let out = cli(&["check", "--config", &config, "--out", csv_dir.to_str().unwrap(), "--workers", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(csv_dir.join("report.csv")).unwrap();
    assert!(csv.starts_with("# config_hash="));
    assert!(csv.contains("main_bound.ratio"));
    assert!(csv_dir.join("summary.json").exists());

    let json_dir = dir.path().join("json");
    let out = cli(&["check", "--config", &config, "--out", json_dir.to_str().unwrap(), "--format", "json", "--only", "cutoff_certificates"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(json_dir.join("report.json")).unwrap()).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["quantity"].as_str().unwrap().starts_with("cutoff_certificates.")));
}

#[test]
fn solve_writes_final_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out_dir = dir.path().join("solve");
    let out = cli(&["solve", "--config", &config, "--out", out_dir.to_str().unwrap(), "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let snap = fs::read_to_string(out_dir.join("runs").join("eig.csv")).unwrap();
    assert!(snap.lines().count() > 256);
}
