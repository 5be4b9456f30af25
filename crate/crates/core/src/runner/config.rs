//! Declarative experiment description and its validation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::{Ball, GammaPolicy, LevelWeight, ParabolicCylinder};
use crate::orlicz::{OrliczFunction, PhiSpec, ScalarAux};
use crate::solver::{GridSpec, PresetSpec, SolverOptions};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    /// Growth function of every run that does not set its own.
    pub phi: PhiSpec,
    /// Grid of every run that does not set its own.
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverOptions,
    /// Added to every run seed.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub runs: Vec<RunSpec>,
    #[serde(default)]
    pub cylinders: Vec<CylinderSpec>,
    #[serde(default)]
    pub balls: Vec<BallSpec>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    #[default]
    Parabolic,
    Elliptic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub id: String,
    pub preset: PresetSpec,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub phi: Option<PhiSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Number of uniform refinements (cells doubled, step halved).
    #[serde(default)]
    pub refine: u32,
    #[serde(default)]
    pub mode: RunMode,
}

fn one() -> f64 {
    1.0
}

/// How the time scaling of a cylinder is set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaPolicy {
    Fixed { value: f64 },
    /// `α` balancing `ρ(λ) α^{(n-2)/2} = λ²/α` at the gradient level `λ`.
    Intrinsic { level: f64 },
}

impl AlphaPolicy {
    pub fn resolve(&self, phi: &OrliczFunction, n: usize) -> Result<f64> {
        match *self {
            AlphaPolicy::Fixed { value } => Ok(value),
            AlphaPolicy::Intrinsic { level } => {
                if !(level > 0.0 && level.is_finite()) {
                    return Err(Error::InvalidParameter(format!("intrinsic level must be positive, got {level}")));
                }
                let rho = ScalarAux::new(phi.clone(), n).rho(level);
                Ok((level * level / rho).powf(2.0 / n as f64))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderSpec {
    pub id: String,
    pub t0: f64,
    pub x0: [f64; 2],
    #[serde(rename = "R")]
    pub r: f64,
    pub alpha: AlphaPolicy,
}

impl CylinderSpec {
    pub fn build(&self, phi: &OrliczFunction, n: usize) -> Result<ParabolicCylinder> {
        ParabolicCylinder::new(self.t0, self.x0, self.r, self.alpha.resolve(phi, n)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub id: String,
    pub x0: [f64; 2],
    #[serde(rename = "R")]
    pub r: f64,
}

impl BallSpec {
    pub fn build(&self) -> Ball {
        Ball { x0: self.x0, r: self.r }
    }
}

/// Named groups of runs whose suite maxima must agree with a reference group.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stability {
    pub reference: String,
    pub sets: BTreeMap<String, Vec<String>>,
    /// Allowed relative deviation of each group maximum from the reference.
    #[serde(default = "twenty_percent")]
    pub tolerance: f64,
}

fn twenty_percent() -> f64 {
    0.2
}

/// One harness check over a selection of runs and regions. Empty selections
/// mean every compatible run / region.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    MainBound {
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        runs: Vec<String>,
        #[serde(default)]
        cylinders: Vec<String>,
        #[serde(default)]
        max_ratio: Option<f64>,
        #[serde(default)]
        min_evaluations: usize,
        #[serde(default)]
        stability: Option<Stability>,
    },
    LevelsetLemma {
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        runs: Vec<String>,
        #[serde(default)]
        cylinders: Vec<String>,
        #[serde(default = "sup_level")]
        gamma: GammaPolicy,
        #[serde(default = "eight")]
        k_max: usize,
        #[serde(default = "beta_envelope")]
        max_beta: f64,
    },
    Closure {
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        runs: Vec<String>,
        #[serde(default)]
        cylinders: Vec<String>,
        #[serde(default = "lemma_level")]
        gamma: GammaPolicy,
        #[serde(default = "eight")]
        k_max: usize,
    },
    AmplitudeSweep {
        #[serde(default)]
        label: Option<String>,
        run: String,
        cylinder: String,
        #[serde(default = "halvings")]
        amplitudes: Vec<f64>,
        #[serde(default = "one_percent")]
        max_fraction: f64,
    },
    Caccioppoli {
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        runs: Vec<String>,
        #[serde(default)]
        cylinders: Vec<String>,
        #[serde(default = "weight_one")]
        weight: LevelWeight,
        #[serde(default = "energy_envelope")]
        envelope: f64,
    },
    CaccioppoliSweep {
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        runs: Vec<String>,
        #[serde(default)]
        cylinders: Vec<String>,
        #[serde(default = "eight")]
        quantiles: usize,
        #[serde(default = "three")]
        max_variation: f64,
    },
    W21 {
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        runs: Vec<String>,
        #[serde(default)]
        cylinders: Vec<String>,
        #[serde(default)]
        envelope: Option<f64>,
    },
    Stationary {
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        runs: Vec<String>,
        #[serde(default)]
        balls: Vec<String>,
        #[serde(default = "twelve")]
        k_max: usize,
        #[serde(default)]
        kappa: Option<f64>,
        #[serde(default = "decay_envelope")]
        max_decay: f64,
        #[serde(default)]
        stability: Option<Stability>,
    },
    Hoelder {
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        runs: Vec<String>,
        #[serde(default)]
        cylinders: Vec<String>,
        #[serde(default)]
        min_exponent: Option<f64>,
    },
    Cutoffs {
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        runs: Vec<String>,
        #[serde(default)]
        cylinders: Vec<String>,
        #[serde(default = "six")]
        k_max: usize,
    },
}

fn lemma_level() -> GammaPolicy {
    GammaPolicy::Lemma
}

fn sup_level() -> GammaPolicy {
    GammaPolicy::Quantile { q: 1.0 }
}
fn eight() -> usize {
    8
}
fn six() -> usize {
    6
}
fn twelve() -> usize {
    12
}
fn three() -> f64 {
    3.0
}
fn beta_envelope() -> f64 {
    3.2
}
fn halvings() -> Vec<f64> {
    vec![1.0, 0.5, 0.25, 0.125]
}
fn one_percent() -> f64 {
    0.01
}
fn weight_one() -> LevelWeight {
    LevelWeight::One
}
fn energy_envelope() -> f64 {
    64.0
}
fn decay_envelope() -> f64 {
    1e-6
}

/// Which side of the domain a check samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionKind {
    Cylinder,
    Ball,
}

impl CheckSpec {
    /// Name used by `describe-check`.
    pub fn name(&self) -> &'static str {
        match self {
            CheckSpec::MainBound { .. } => "verify_main_bound",
            CheckSpec::LevelsetLemma { .. } => "verify_levelset_lemma",
            CheckSpec::Closure { .. } => "closure",
            CheckSpec::AmplitudeSweep { .. } => "dibenedetto_compare",
            CheckSpec::Caccioppoli { .. } => "caccioppoli_check",
            CheckSpec::CaccioppoliSweep { .. } => "caccioppoli_sweep",
            CheckSpec::W21 { .. } => "w21_check",
            CheckSpec::Stationary { .. } => "stationary_check",
            CheckSpec::Hoelder { .. } => "hoelder_diagnostic",
            CheckSpec::Cutoffs { .. } => "cutoff_certificates",
        }
    }

    pub fn label(&self) -> String {
        let label = match self {
            CheckSpec::MainBound { label, .. }
            | CheckSpec::LevelsetLemma { label, .. }
            | CheckSpec::Closure { label, .. }
            | CheckSpec::AmplitudeSweep { label, .. }
            | CheckSpec::Caccioppoli { label, .. }
            | CheckSpec::CaccioppoliSweep { label, .. }
            | CheckSpec::W21 { label, .. }
            | CheckSpec::Stationary { label, .. }
            | CheckSpec::Hoelder { label, .. }
            | CheckSpec::Cutoffs { label, .. } => label,
        };
        label.clone().unwrap_or_else(|| self.name().to_string())
    }

    pub fn region_kind(&self) -> RegionKind {
        match self {
            CheckSpec::Stationary { .. } => RegionKind::Ball,
            _ => RegionKind::Cylinder,
        }
    }

    /// `(runs, regions)` selections, as written.
    pub fn selection(&self) -> (Vec<String>, Vec<String>) {
        match self {
            CheckSpec::MainBound { runs, cylinders, .. }
            | CheckSpec::LevelsetLemma { runs, cylinders, .. }
            | CheckSpec::Closure { runs, cylinders, .. }
            | CheckSpec::Caccioppoli { runs, cylinders, .. }
            | CheckSpec::CaccioppoliSweep { runs, cylinders, .. }
            | CheckSpec::W21 { runs, cylinders, .. }
            | CheckSpec::Hoelder { runs, cylinders, .. }
            | CheckSpec::Cutoffs { runs, cylinders, .. } => (runs.clone(), cylinders.clone()),
            CheckSpec::Stationary { runs, balls, .. } => (runs.clone(), balls.clone()),
            CheckSpec::AmplitudeSweep { run, cylinder, .. } => (vec![run.clone()], vec![cylinder.clone()]),
        }
    }

    fn stability(&self) -> Option<&Stability> {
        match self {
            CheckSpec::MainBound { stability, .. } | CheckSpec::Stationary { stability, .. } => stability.as_ref(),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub format: ReportFormat,
    /// Write two-column plot-data files.
    #[serde(default = "yes")]
    pub plots: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            format: ReportFormat::Csv,
            plots: true,
        }
    }
}

/// Parses and validates a config; schema errors carry a JSON pointer.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        Error::config(pointer, e.into_inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        "/".into()
    } else {
        out
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        parse_config(&std::fs::read_to_string(path)?)
    }

    /// Reference and uniqueness checks that the schema cannot express.
    pub fn validate(&self) -> Result<()> {
        unique("/runs", self.runs.iter().map(|r| r.id.as_str()))?;
        unique("/cylinders", self.cylinders.iter().map(|c| c.id.as_str()))?;
        unique("/balls", self.balls.iter().map(|b| b.id.as_str()))?;
        let runs: BTreeSet<&str> = self.runs.iter().map(|r| r.id.as_str()).collect();
        let cyls: BTreeSet<&str> = self.cylinders.iter().map(|c| c.id.as_str()).collect();
        let balls: BTreeSet<&str> = self.balls.iter().map(|b| b.id.as_str()).collect();
        for (i, r) in self.runs.iter().enumerate() {
            if !(r.amplitude.is_finite()) {
                return Err(Error::config(format!("/runs/{i}/amplitude"), "amplitude must be finite"));
            }
        }
        for (i, check) in self.checks.iter().enumerate() {
            let (rs, regions) = check.selection();
            for (j, r) in rs.iter().enumerate() {
                if !runs.contains(r.as_str()) {
                    return Err(Error::config(format!("/checks/{i}/runs/{j}"), format!("unknown run `{r}`")));
                }
            }
            let (known, key) = match check.region_kind() {
                RegionKind::Cylinder => (&cyls, "cylinders"),
                RegionKind::Ball => (&balls, "balls"),
            };
            for (j, c) in regions.iter().enumerate() {
                if !known.contains(c.as_str()) {
                    return Err(Error::config(format!("/checks/{i}/{key}/{j}"), format!("unknown region `{c}`")));
                }
            }
            if let Some(st) = check.stability() {
                if !st.sets.contains_key(&st.reference) {
                    return Err(Error::config(
                        format!("/checks/{i}/stability/reference"),
                        format!("no set named `{}`", st.reference),
                    ));
                }
                for (name, members) in &st.sets {
                    for (j, r) in members.iter().enumerate() {
                        if !runs.contains(r.as_str()) {
                            return Err(Error::config(
                                format!("/checks/{i}/stability/sets/{name}/{j}"),
                                format!("unknown run `{r}`"),
                            ));
                        }
                    }
                }
            }
            if let CheckSpec::AmplitudeSweep { amplitudes, .. } = check {
                if amplitudes.len() < 2 || amplitudes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                    return Err(Error::config(
                        format!("/checks/{i}/amplitudes"),
                        "need at least two positive amplitudes",
                    ));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical serialisation, without the output section.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSpec::default();
        let text = serde_json::to_string(&c).expect("config serialises");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

fn unique<'a>(pointer: &str, ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (i, id) in ids.enumerate() {
        if !seen.insert(id) {
            return Err(Error::config(format!("{pointer}/{i}/id"), format!("duplicate id `{id}`")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "phi": { "kind": "power", "p": 3 },
        "grid": { "n": 2, "lower": [0, 0], "upper": [1, 1], "cells": [8, 8], "dt": 0.01, "t_end": 0.05 }
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert!(c.runs.is_empty() && c.checks.is_empty());
        assert_eq!(c.output.format, ReportFormat::Csv);
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn missing_phi_is_a_pointered_error() {
        let text = r#"{ "grid": { "n": 2, "lower": [0, 0], "upper": [1, 1], "cells": [8, 8], "dt": 0.01, "t_end": 0.05 } }"#;
        match parse_config(text) {
            Err(Error::Config { message, .. }) => assert!(message.contains("phi"), "{message}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nested_errors_point_at_the_field() {
        let text = MINIMAL.replace(
            "\"grid\"",
            r#""runs": [{ "id": "a", "preset": { "name": "eigenmode", "bogus": 1 } }], "grid""#,
        );
        match parse_config(&text) {
            Err(Error::Config { pointer, .. }) => assert!(pointer.starts_with("/runs/0/preset"), "{pointer}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_references_are_rejected() {
        let text = MINIMAL.replace("\"grid\"", r#""checks": [{ "check": "main_bound", "runs": ["nope"] }], "grid""#);
        match parse_config(&text) {
            Err(Error::Config { pointer, .. }) => assert_eq!(pointer, "/checks/0/runs/0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_ignores_output_and_tracks_content() {
        let a = parse_config(MINIMAL).unwrap();
        let mut b = a.clone();
        b.output.dir = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 7;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn intrinsic_alpha_balances_the_two_scalings() {
        let phi = OrliczFunction::power(3.0).unwrap();
        let level = 2.0;
        let alpha = AlphaPolicy::Intrinsic { level }.resolve(&phi, 2).unwrap();
        let rho = ScalarAux::new(phi, 2).rho(level);
        assert!((rho - level * level / alpha).abs() < 1e-12 * rho);
    }
}
