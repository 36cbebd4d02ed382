//! CSV and report writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::ExperimentConfig;
use crate::experiments::{ExperimentReport, Relation, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-3..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn metadata(config: &ExperimentConfig) -> String {
    let mut echo = config.clone();
    echo.output.directory = None;
    let mut out = format!("# bohmsim {VERSION}\n");
    for line in echo.render().lines() {
        if line.is_empty() {
            out += "#\n";
        } else {
            let _ = writeln!(out, "# {line}");
        }
    }
    out
}

/// Render a table as CSV with `#` metadata lines, keeping every
/// `stride`-th row plus the last.
pub fn render_csv(config: &ExperimentConfig, table: &Table, stride: usize) -> String {
    let mut out = metadata(config);
    out += &table.columns.join(",");
    out.push('\n');
    let n = table.rows.len();
    for (i, row) in table.rows.iter().enumerate() {
        if i % stride.max(1) != 0 && i + 1 != n {
            continue;
        }
        let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
        out += &cells.join(",");
        out.push('\n');
    }
    out
}

/// Human-readable contract table and summary.
pub fn render_report(report: &ExperimentReport, files: &[PathBuf]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "experiment: {}", report.experiment);
    let _ = writeln!(out, "status: {}", if report.passed() { "PASS" } else { "FAIL" });
    let _ = writeln!(out);
    let width = report
        .contracts
        .iter()
        .map(|c| c.name.chars().count())
        .max()
        .unwrap_or(8)
        .max(8);
    let _ = writeln!(out, "{:<width$}  {:>24}  {:>2}  {:>24}  result", "contract", "measured", "", "bound");
    for c in &report.contracts {
        let rel = match c.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        let _ = writeln!(
            out,
            "{:<width$}  {:>24}  {rel}  {:>24}  {}",
            c.name,
            format_number(c.measured),
            format_number(c.bound),
            if c.passed() { "pass" } else { "FAIL" }
        );
    }
    if !report.summary.is_empty() {
        let _ = writeln!(out);
        for (name, value) in &report.summary {
            let _ = writeln!(out, "{name}: {}", format_number(*value));
        }
    }
    if !files.is_empty() {
        let _ = writeln!(out);
        for f in files {
            let _ = writeln!(out, "wrote {}", f.display());
        }
    }
    out
}

/// Write `series.csv`, `trajectories.csv` (when present) and `report.txt`
/// into `dir`. Returns the paths written.
pub fn write_outputs(config: &ExperimentConfig, report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let stride = config.output.stride;
    let mut files = Vec::new();
    let series = dir.join("series.csv");
    fs::write(&series, render_csv(config, &report.series, stride))
        .with_context(|| format!("writing {}", series.display()))?;
    files.push(series);
    if let Some(t) = &report.trajectories {
        let path = dir.join("trajectories.csv");
        fs::write(&path, render_csv(config, t, 1)).with_context(|| format!("writing {}", path.display()))?;
        files.push(path);
    }
    let path = dir.join("report.txt");
    let mut listed = files.clone();
    listed.push(path.clone());
    fs::write(&path, render_report(report, &listed)).with_context(|| format!("writing {}", path.display()))?;
    files.push(path);
    Ok(files)
}
