//! `compare`: per-column deviation report between two runs, with the
//! second run resampled onto the first run's time grid by linear
//! interpolation over the overlapping window.

use std::fs;
use std::path::Path;

use serde_json::json;

use crate::config::RunConfig;
use crate::csvio::{self, CsvTable, COLUMNS};
use crate::error::{CliError, CliResult};

use super::{ensure_dir, TRAJECTORY_FILE};

pub const REPORT_FILE: &str = "comparison.json";
const DEFAULT_TOL_ABS: f64 = 1e-8;
const TIME_COLUMN: &str = "t_scaled_fast";

#[derive(Debug, Clone)]
pub struct ColumnReport {
    pub name: String,
    pub max_abs: f64,
    pub rms: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub columns: Vec<ColumnReport>,
    pub overlap: (f64, f64),
    pub samples: usize,
    pub pass: bool,
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    match times.binary_search_by(|probe| probe.total_cmp(&t)) {
        Ok(i) => values[i],
        Err(i) => {
            let (lo, hi) = (i - 1, i);
            let w = (t - times[lo]) / (times[hi] - times[lo]);
            values[lo] + w * (values[hi] - values[lo])
        }
    }
}

/// Compares two trajectory tables on their shared time window.
pub fn compare_tables(
    a: &CsvTable,
    b: &CsvTable,
    columns: &[String],
    tol_abs: f64,
    tol_rel: f64,
) -> CliResult<CompareReport> {
    let ta = a
        .column(TIME_COLUMN)
        .ok_or_else(|| CliError::Config(format!("run A lacks column {TIME_COLUMN}")))?;
    let tb = b
        .column(TIME_COLUMN)
        .ok_or_else(|| CliError::Config(format!("run B lacks column {TIME_COLUMN}")))?;
    if ta.is_empty() || tb.is_empty() {
        return Err(CliError::Config("a run has no samples".into()));
    }
    let lo = ta[0].max(tb[0]);
    let hi = ta[ta.len() - 1].min(tb[tb.len() - 1]);
    if !(hi >= lo) {
        return Err(CliError::Config(format!(
            "disjoint time grids: A covers [{:.6e}, {:.6e}], B covers [{:.6e}, {:.6e}]",
            ta[0],
            ta[ta.len() - 1],
            tb[0],
            tb[tb.len() - 1]
        )));
    }
    let indices: Vec<usize> = (0..ta.len())
        .filter(|&k| ta[k] >= lo && ta[k] <= hi)
        .collect();
    if indices.is_empty() {
        return Err(CliError::Config(
            "no samples of run A fall inside the shared time window".into(),
        ));
    }

    let mut reports = Vec::with_capacity(columns.len());
    let mut all_pass = true;
    for name in columns {
        let ca = a
            .column(name)
            .ok_or_else(|| CliError::Config(format!("run A lacks column {name}")))?;
        let cb = b
            .column(name)
            .ok_or_else(|| CliError::Config(format!("run B lacks column {name}")))?;
        let mut max_abs: f64 = 0.0;
        let mut sq_sum = 0.0;
        let mut scale: f64 = 0.0;
        for &k in &indices {
            let va = ca[k];
            let vb = interpolate(tb, cb, ta[k]);
            let d = (va - vb).abs();
            max_abs = max_abs.max(d);
            sq_sum += d * d;
            scale = scale.max(va.abs());
        }
        let rms = (sq_sum / indices.len() as f64).sqrt();
        let threshold = tol_abs + tol_rel * scale;
        let pass = max_abs <= threshold;
        all_pass &= pass;
        reports.push(ColumnReport {
            name: name.clone(),
            max_abs,
            rms,
            threshold,
            pass,
        });
    }
    Ok(CompareReport {
        columns: reports,
        overlap: (lo, hi),
        samples: indices.len(),
        pass: all_pass,
    })
}

fn value_columns() -> Vec<String> {
    COLUMNS
        .iter()
        .filter(|name| !name.starts_with("t_scaled"))
        .map(|name| name.to_string())
        .collect()
}

pub fn run(config: &RunConfig, out_dir: Option<&Path>) -> CliResult<()> {
    let section = config
        .compare
        .as_ref()
        .ok_or_else(|| CliError::Config("compare requires a [compare] section".into()))?;
    let table_a = csvio::read_trajectory_table(&section.run_a.join(TRAJECTORY_FILE))?;
    let table_b = csvio::read_trajectory_table(&section.run_b.join(TRAJECTORY_FILE))?;
    let columns = section.columns.clone().unwrap_or_else(value_columns);
    let tol_abs = section.tol_abs.unwrap_or(DEFAULT_TOL_ABS);
    let tol_rel = section.tol_rel.unwrap_or(0.0);

    let report = compare_tables(&table_a, &table_b, &columns, tol_abs, tol_rel)?;

    println!(
        "compare: {} vs {} over t in [{:.6e}, {:.6e}] ({} samples)",
        section.run_a.display(),
        section.run_b.display(),
        report.overlap.0,
        report.overlap.1,
        report.samples
    );
    for col in &report.columns {
        println!(
            "  {:<16} max {:.6e}  rms {:.6e}  threshold {:.3e}  {}",
            col.name,
            col.max_abs,
            col.rms,
            col.threshold,
            if col.pass { "pass" } else { "FAIL" }
        );
    }

    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        let doc = json!({
            "run_a": section.run_a,
            "run_b": section.run_b,
            "tol_abs": tol_abs,
            "tol_rel": tol_rel,
            "overlap": { "t_lo": report.overlap.0, "t_hi": report.overlap.1 },
            "samples": report.samples,
            "pass": report.pass,
            "columns": report.columns.iter().map(|c| json!({
                "name": c.name,
                "max_abs": c.max_abs,
                "rms": c.rms,
                "threshold": c.threshold,
                "pass": c.pass,
            })).collect::<Vec<_>>(),
        });
        fs::write(dir.join(REPORT_FILE), format!("{:#}\n", doc))?;
    }

    if report.pass {
        println!("compare: PASS");
        Ok(())
    } else {
        Err(CliError::CompareFailed(format!(
            "{} of {} columns exceed tolerance",
            report.columns.iter().filter(|c| !c.pass).count(),
            report.columns.len()
        )))
    }
}
