//! End-to-end experiments: declarative config, solver runs (cached), harness
//! checks on a worker pool, and CSV/JSON reports with plot-data files.

pub mod cache;
pub mod catalog;
pub(crate) mod checks;
pub mod config;
pub mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::Samples;
use crate::orlicz::{OrliczFunction, PhiSpec};
use crate::solver::{solve_elliptic, solve_parabolic, write_snapshot_csv, GradOrField, GridSpec, PresetSpec, Problem, SolverOptions};

pub use cache::{cache_key, FieldCache};
pub use catalog::{describe_check, list_presets, CheckDoc, CHECKS};
pub use config::{
    parse_config, AlphaPolicy, BallSpec, CheckSpec, CylinderSpec, ExperimentConfig, OutputSpec, RegionKind, ReportFormat, RunMode,
    RunSpec, Stability,
};
pub use report::{CheckSummary, PlotData, Row, RunSummary, Summary};

use checks::{SampleStore, Selection};

/// Process exit status of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExitStatus {
    Pass = 0,
    AssertionFailed = 1,
    ConfigError = 2,
    NonConvergence = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Status an error maps to when it aborts an experiment.
    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::NonConvergence { .. } | Error::NumericalBlowup(_) => ExitStatus::NonConvergence,
            Error::Io(_) => ExitStatus::AssertionFailed,
            _ => ExitStatus::ConfigError,
        }
    }
}

/// Overrides and environment of one invocation.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Report directory; falls back to the config's `output.dir`, then `./out`.
    pub out_dir: Option<PathBuf>,
    /// Worker threads (default: rayon's choice).
    pub workers: Option<usize>,
    /// Replaces the config's base seed.
    pub seed: Option<u64>,
    pub format: Option<ReportFormat>,
    /// Solver cache directory; `None` uses `<out>/cache`.
    pub cache_dir: Option<PathBuf>,
    pub no_cache: bool,
    /// Restrict to checks whose label or name is listed (empty: all).
    pub only: Vec<String>,
    /// Solve and write final snapshots without running checks.
    pub solve_only: bool,
}

pub struct Outcome {
    pub status: ExitStatus,
    pub summary: Summary,
    pub rows: Vec<Row>,
    pub out_dir: PathBuf,
}

/// Everything that determines a solver output.
#[derive(Clone, Debug, Serialize)]
struct JobSpec {
    phi: PhiSpec,
    grid: GridSpec,
    preset: PresetSpec,
    amplitude: f64,
    seed: u64,
    mode: RunMode,
    solver: SolverOptions,
}

struct Job {
    id: String,
    spec: JobSpec,
    key: String,
}

struct Solved {
    phi: Option<OrliczFunction>,
    field: Option<Arc<GradOrField>>,
    error: Option<Error>,
}

fn refined(grid: &GridSpec, times: u32) -> GridSpec {
    (0..times).fold(grid.clone(), |g, _| g.refined(0.5))
}

fn build_jobs(config: &ExperimentConfig, seed: u64) -> Vec<Job> {
    let mut jobs = Vec::new();
    let mut push = |id: String, run: &RunSpec, amplitude: f64| {
        let spec = JobSpec {
            phi: run.phi.clone().unwrap_or_else(|| config.phi.clone()),
            grid: refined(run.grid.as_ref().unwrap_or(&config.grid), run.refine),
            preset: run.preset.clone(),
            amplitude,
            seed: seed.wrapping_add(run.seed),
            mode: run.mode,
            solver: config.solver,
        };
        let key = cache_key(&spec);
        jobs.push(Job { id, spec, key });
    };
    for run in &config.runs {
        push(run.id.clone(), run, run.amplitude);
    }
    for check in &config.checks {
        if let CheckSpec::AmplitudeSweep { run, amplitudes, .. } = check {
            let base = config.runs.iter().find(|r| &r.id == run).expect("validated reference");
            for a in amplitudes {
                push(sweep_id(run, *a), base, base.amplitude * a);
            }
        }
    }
    let mut seen = BTreeSet::new();
    jobs.retain(|j| seen.insert(j.id.clone()));
    jobs
}

fn sweep_id(run: &str, amplitude: f64) -> String {
    format!("{run}@{amplitude}")
}

fn solve(job: &Job, cache: Option<&FieldCache>) -> Solved {
    let phi = match job.spec.phi.build() {
        Ok(p) => p,
        Err(e) => {
            return Solved {
                phi: None,
                field: None,
                error: Some(e),
            }
        }
    };
    let result = (|| -> Result<GradOrField> {
        if let Some(c) = cache {
            // unreadable entries are treated as misses and rewritten
            if let Ok(Some(f)) = c.load(&job.key) {
                return Ok(f);
            }
        }
        let problem = Problem::from_preset(&phi, job.spec.grid.clone(), &job.spec.preset, job.spec.amplitude, job.spec.seed)?;
        let field = match job.spec.mode {
            RunMode::Parabolic => solve_parabolic(&phi, &problem, job.spec.solver)?,
            RunMode::Elliptic => solve_elliptic(&phi, &problem, job.spec.solver)?,
        };
        if let Some(c) = cache {
            c.store(&job.key, &field)?;
        }
        Ok(field)
    })();
    match result {
        Ok(f) => Solved {
            phi: Some(phi),
            field: Some(Arc::new(f)),
            error: None,
        },
        Err(e) => Solved {
            phi: Some(phi),
            field: None,
            error: Some(e),
        },
    }
}

/// Runs and regions a check touches, with defaults filled in.
fn select(config: &ExperimentConfig, check: &CheckSpec) -> Selection {
    let kind = check.region_kind();
    let wanted_mode = match kind {
        RegionKind::Cylinder => RunMode::Parabolic,
        RegionKind::Ball => RunMode::Elliptic,
    };
    let (runs, regions) = check.selection();
    let runs = if runs.is_empty() {
        config.runs.iter().filter(|r| r.mode == wanted_mode).map(|r| r.id.clone()).collect()
    } else {
        runs
    };
    let regions = if regions.is_empty() {
        match kind {
            RegionKind::Cylinder => config.cylinders.iter().map(|c| c.id.clone()).collect(),
            RegionKind::Ball => config.balls.iter().map(|b| b.id.clone()).collect(),
        }
    } else {
        regions
    };
    let mut extra_runs: Vec<String> = Vec::new();
    let stability = match check {
        CheckSpec::MainBound { stability, .. } | CheckSpec::Stationary { stability, .. } => stability.as_ref(),
        _ => None,
    };
    if let Some(st) = stability {
        for members in st.sets.values() {
            for r in members {
                if !runs.contains(r) && !extra_runs.contains(r) {
                    extra_runs.push(r.clone());
                }
            }
        }
    }
    if let CheckSpec::AmplitudeSweep { run, amplitudes, .. } = check {
        extra_runs = amplitudes.iter().map(|a| sweep_id(run, *a)).collect();
    }
    Selection {
        runs,
        regions,
        extra_runs,
    }
}

fn sample(
    config: &ExperimentConfig,
    job: &Job,
    solved: &Solved,
    region: &str,
    kind: RegionKind,
) -> std::result::Result<Arc<Samples>, String> {
    let (Some(field), Some(phi)) = (&solved.field, &solved.phi) else {
        let why = solved.error.as_ref().map_or_else(|| "not solved".to_string(), |e| e.to_string());
        return Err(format!("run failed: {why}"));
    };
    let mode_ok = match kind {
        RegionKind::Cylinder => job.spec.mode == RunMode::Parabolic,
        RegionKind::Ball => job.spec.mode == RunMode::Elliptic,
    };
    if !mode_ok {
        return Err(format!("run mode does not match a {} region", checks::region_kind_name(kind)));
    }
    let result = match kind {
        RegionKind::Cylinder => {
            let spec = config.cylinders.iter().find(|c| c.id == region).expect("validated reference");
            spec.build(phi, job.spec.grid.n).and_then(|cyl| Samples::parabolic(field, phi, cyl))
        }
        RegionKind::Ball => {
            let spec = config.balls.iter().find(|b| b.id == region).expect("validated reference");
            Samples::stationary(field, phi, spec.build())
        }
    };
    result.map(Arc::new).map_err(|e| e.to_string())
}

/// Executes an experiment and writes its reports. Config problems are
/// returned as errors (exit status 2); solver and assertion failures are
/// reported through [`Outcome::status`] with the reports written.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<Outcome> {
    config.validate()?;
    let mut config = config.clone();
    if let Some(seed) = options.seed {
        config.seed = seed;
    }
    let out_dir = options
        .out_dir
        .clone()
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let format = options.format.unwrap_or(config.output.format);
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = options.workers {
            b = b.num_threads(w.max(1));
        }
        b.build().map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?
    };
    let cache = if options.no_cache {
        None
    } else {
        Some(FieldCache::new(options.cache_dir.clone().unwrap_or_else(|| out_dir.join("cache")))?)
    };
    pool.install(|| execute(&config, options, &out_dir, format, cache.as_ref()))
}

fn execute(
    config: &ExperimentConfig,
    options: &RunOptions,
    out_dir: &std::path::Path,
    format: ReportFormat,
    cache: Option<&FieldCache>,
) -> Result<Outcome> {
    let hash = config.hash();
    let selected: Vec<&CheckSpec> = if options.solve_only {
        Vec::new()
    } else {
        config
            .checks
            .iter()
            .filter(|c| options.only.is_empty() || options.only.iter().any(|o| *o == c.label() || *o == c.name()))
            .collect()
    };
    if !options.only.is_empty() && selected.is_empty() && !options.solve_only {
        return Err(Error::config("/checks", format!("no check matches {:?}", options.only)));
    }

    let all_jobs = build_jobs(config, config.seed);
    let selections: Vec<Selection> = selected.iter().map(|c| select(config, c)).collect();
    let needed: BTreeSet<String> = if options.solve_only {
        config.runs.iter().map(|r| r.id.clone()).collect()
    } else {
        selections.iter().flat_map(|s| s.runs.iter().chain(&s.extra_runs).cloned()).collect()
    };
    let jobs: Vec<Job> = all_jobs.into_iter().filter(|j| needed.contains(&j.id)).collect();
    let solved: Vec<Solved> = jobs.par_iter().map(|j| solve(j, cache)).collect();
    let index: BTreeMap<&str, usize> = jobs.iter().enumerate().map(|(i, j)| (j.id.as_str(), i)).collect();

    let mut pairs: BTreeSet<(String, String, bool)> = BTreeSet::new();
    for (check, sel) in selected.iter().zip(&selections) {
        let ball = check.region_kind() == RegionKind::Ball;
        for (r, c) in sel.pairs() {
            pairs.insert((r, c, ball));
        }
    }
    let pairs: Vec<(String, String, bool)> = pairs.into_iter().collect();
    let sampled: Vec<_> = pairs
        .par_iter()
        .map(|(r, c, ball)| {
            let i = index[r.as_str()];
            let kind = if *ball { RegionKind::Ball } else { RegionKind::Cylinder };
            ((r.clone(), c.clone()), sample(config, &jobs[i], &solved[i], c, kind))
        })
        .collect();
    let store: SampleStore = sampled.into_iter().collect();

    let outputs: Vec<checks::CheckOutput> = selected
        .par_iter()
        .zip(&selections)
        .map(|(check, sel)| checks::evaluate(check, sel, &store))
        .collect();

    let mut status = ExitStatus::Pass;
    let mut runs = Vec::new();
    for (job, s) in jobs.iter().zip(&solved) {
        if let Some(e) = &s.error {
            let st = ExitStatus::of_error(e);
            if st.code() > status.code() {
                status = st;
            }
        }
        runs.push(RunSummary {
            id: job.id.clone(),
            key: job.key.clone(),
            snapshots: s.field.as_ref().map_or(0, |f| f.snapshots.len()),
            error: s.error.as_ref().map(|e| e.to_string()),
        });
    }
    if status == ExitStatus::Pass && outputs.iter().any(|o| !o.summary.pass) {
        status = ExitStatus::AssertionFailed;
    }
    let mut rows = Vec::new();
    let mut plots = Vec::new();
    let mut summaries = Vec::new();
    for o in outputs {
        rows.extend(o.rows);
        plots.extend(o.plots);
        summaries.push(o.summary);
    }
    let summary = Summary {
        name: config.name.clone(),
        config_hash: hash,
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: status.code(),
        pass: status == ExitStatus::Pass,
        runs,
        checks: summaries,
    };
    let plots = if config.output.plots { plots } else { Vec::new() };
    report::write_reports(out_dir, format, &summary, &rows, &plots)?;
    if options.solve_only {
        let dir = out_dir.join("runs");
        std::fs::create_dir_all(&dir)?;
        for (job, s) in jobs.iter().zip(&solved) {
            if let Some(f) = &s.field {
                let mut file = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{}.csv", report::file_stem(&job.id))))?);
                write_snapshot_csv(&mut file, &f.geo, f.last())?;
            }
        }
    }
    Ok(Outcome {
        status,
        summary,
        rows,
        out_dir: out_dir.to_path_buf(),
    })
}

/// Bundled acceptance configuration.
pub const ACCEPTANCE_CONFIG: &str = include_str!("../../configs/acceptance.json");

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str) -> ExperimentConfig {
        parse_config(&format!(
            r#"{{
                "phi": {{ "kind": "power", "p": 3 }},
                "grid": {{ "n": 2, "lower": [0, 0], "upper": [1, 1], "cells": [16, 16], "dt": 0.01, "t_end": 0.1 }}
                {extra}
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn empty_run_list_passes_with_hash() {
        let dir = tempfile::tempdir().unwrap();
        let c = config("");
        let out = run_experiment(
            &c,
            &RunOptions {
                out_dir: Some(dir.path().into()),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.status, ExitStatus::Pass);
        assert!(out.rows.is_empty());
        let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
        assert!(csv.starts_with(&format!("# config_hash={}", c.hash())));
    }

    #[test]
    fn failed_assertion_keeps_reports() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            r#", "runs": [{ "id": "e", "preset": { "name": "eigenmode", "modes": [1, 1] } }],
                 "cylinders": [{ "id": "A", "t0": 0.1, "x0": [0.5, 0.5], "R": 0.1, "alpha": { "policy": "fixed", "value": 1 } }],
                 "checks": [{ "check": "main_bound", "max_ratio": 1e-12 }]"#,
        );
        let out = run_experiment(
            &c,
            &RunOptions {
                out_dir: Some(dir.path().into()),
                no_cache: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.status, ExitStatus::AssertionFailed);
        assert!(out.rows.iter().any(|r| r.quantity == "verify_main_bound.ratio"));
        assert!(dir.path().join("summary.json").exists());
    }

    #[test]
    fn bundled_acceptance_config_parses() {
        let c = parse_config(ACCEPTANCE_CONFIG).unwrap();
        assert!(!c.runs.is_empty() && !c.checks.is_empty());
    }
}
