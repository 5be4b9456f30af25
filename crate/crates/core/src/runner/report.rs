//! Report rows, summaries and their serialisation.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::config::ReportFormat;

/// One reported number: `(run_id, cyl_id, k, quantity, value)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub run_id: String,
    pub cyl_id: String,
    pub k: Option<usize>,
    pub quantity: String,
    pub value: f64,
}

impl Row {
    pub fn new(run: &str, region: &str, k: Option<usize>, quantity: impl Into<String>, value: f64) -> Self {
        Self {
            run_id: run.to_string(),
            cyl_id: region.to_string(),
            k,
            quantity: quantity.into(),
            value,
        }
    }
}

/// Two-column data for external plotting.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotData {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    /// Label of the check entry (its name unless labelled).
    pub check: String,
    pub name: String,
    /// Headline statistic of the check (largest ratio, exponent or variation).
    pub max_ratio: Option<f64>,
    pub pass: bool,
    pub evaluations: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub id: String,
    pub key: String,
    pub snapshots: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub config_hash: String,
    pub version: String,
    pub status: i32,
    pub pass: bool,
    pub runs: Vec<RunSummary>,
    pub checks: Vec<CheckSummary>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Shortest round-trip text, in exponent form outside `[1e-4, 1e15)`.
pub fn number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn rows_to_csv(hash: &str, rows: &[Row]) -> String {
    let mut out = format!("# config_hash={hash}\nrun_id,cyl_id,k,quantity,value\n");
    for r in rows {
        let k = r.k.map(|k| k.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&r.run_id),
            csv_field(&r.cyl_id),
            k,
            csv_field(&r.quantity),
            number(r.value)
        );
    }
    out
}

pub fn plot_to_text(hash: &str, plot: &PlotData) -> String {
    let mut out = format!("# config_hash={hash}\n# {} {}\n", plot.x_label, plot.y_label);
    for (x, y) in &plot.points {
        let _ = writeln!(out, "{} {}", number(*x), number(*y));
    }
    out
}

/// File-name safe form of an identifier.
pub fn file_stem(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

pub fn write_reports(
    dir: &Path,
    format: ReportFormat,
    summary: &Summary,
    rows: &[Row],
    plots: &[PlotData],
) -> Result<()> {
    fs::create_dir_all(dir)?;
    match format {
        ReportFormat::Csv => fs::write(dir.join("report.csv"), rows_to_csv(&summary.config_hash, rows))?,
        ReportFormat::Json => {
            let body = serde_json::json!({ "config_hash": summary.config_hash, "rows": rows });
            fs::write(dir.join("report.json"), serde_json::to_string_pretty(&body)? + "\n")?
        }
    }
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(summary)? + "\n")?;
    if !plots.is_empty() {
        let pdir = dir.join("plots");
        fs::create_dir_all(&pdir)?;
        for p in plots {
            fs::write(pdir.join(format!("{}.dat", file_stem(&p.name))), plot_to_text(&summary.config_hash, p))?;
        }
    }
    Ok(())
}
