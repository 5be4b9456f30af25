//! A small experiment driven by a JSON config, as the CLI does it: solves,
//! checks and reports (CSV, summary and plot data) in a temporary directory.
//!
//!     cargo run --release --example experiment_runner

use phicaloric::runner::{parse_config, run_experiment, RunOptions};

const CONFIG: &str = r#"{
  "name": "example",
  "phi": {"kind": "power", "p": 3},
  "grid": {"n": 2, "lower": [0, 0], "upper": [1, 1], "cells": [24, 24], "dt": 0.005, "t_end": 0.1},
  "runs": [
    {"id": "eig", "preset": {"name": "eigenmode", "modes": [1, 1]}},
    {"id": "rs1", "preset": {"name": "random_smooth", "modes": 4}, "seed": 1},
    {"id": "rs2", "preset": {"name": "random_smooth", "modes": 4}, "seed": 2}
  ],
  "cylinders": [
    {"id": "A", "t0": 0.1, "x0": [0.5, 0.5], "R": 0.15, "alpha": {"policy": "fixed", "value": 1}},
    {"id": "B", "t0": 0.1, "x0": [0.5, 0.5], "R": 0.12, "alpha": {"policy": "intrinsic", "level": 2.0}}
  ],
  "checks": [
    {"check": "main_bound", "stability": {"reference": "one", "sets": {"one": ["eig", "rs1"], "two": ["eig", "rs2"]}, "tolerance": 0.5}},
    {"check": "levelset_lemma"},
    {"check": "closure"},
    {"check": "cutoffs", "k_max": 4}
  ]
}"#;

fn main() -> phicaloric::Result<()> {
    let config = parse_config(CONFIG)?;
    let out = tempfile_dir();
    let options = RunOptions {
        out_dir: Some(out.clone()),
        ..RunOptions::default()
    };
    let outcome = run_experiment(&config, &options)?;
    for c in &outcome.summary.checks {
        println!("{:<5} {:<22} {:?}  {}", if c.pass { "PASS" } else { "FAIL" }, c.check, c.max_ratio, c.message);
    }
    println!("status {:?}; {} report rows in {}", outcome.status, outcome.rows.len(), outcome.out_dir.display());
    Ok(())
}

fn tempfile_dir() -> std::path::PathBuf {
    std::env::temp_dir().join(format!("phicaloric_example_{}", std::process::id()))
}
