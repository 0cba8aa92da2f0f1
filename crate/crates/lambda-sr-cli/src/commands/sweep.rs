//! `sweep`: drive-strength scan. Points run in parallel, each in its own
//! subdirectory; the pulse-metric summary is aggregated single-threaded
//! once every point has finished.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use lambda_sr::analysis::{pulse_metrics, PulseMetrics};
use lambda_sr::meanfield::{simulate_with, EndTime, SimOptions};
use rayon::prelude::*;

use crate::config::{Mode, RunConfig};
use crate::error::{CliError, CliResult};
use crate::manifest;

use super::{ensure_dir, write_run_artifacts};

pub const SUMMARY_FILE: &str = "summary.csv";

const SUMMARY_COLUMNS: [&str; 10] = [
    "omega_bar",
    "i1_peak_time",
    "i1_peak_value",
    "i2_peak_time",
    "i2_peak_value",
    "i1_energy",
    "i2_energy",
    "p1_at_i2_peak",
    "p2_at_i2_peak",
    "p3_at_i2_peak",
];

pub fn subdir_name(omega_bar: f64) -> String {
    format!("omega_{omega_bar:.4e}")
}

fn run_point(
    config: &RunConfig,
    out_dir: &Path,
    svg_on: bool,
    omega_bar: f64,
) -> CliResult<PulseMetrics> {
    let base = config
        .params
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep requires [params]".into()))?;
    let grid = config
        .grid
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep requires [grid]".into()))?;

    let subdir = out_dir.join(subdir_name(omega_bar));
    let mut point_config = config.clone();
    let point_params = point_config.params.as_mut().unwrap();
    point_params.rabi =
        omega_bar * base.mu1 * base.gamma1 * base.n_atoms as f64;
    point_config.run.mode = Mode::Meanfield;
    point_config.run.out = Some(subdir.clone());
    point_config.sweep = None;

    let params = point_config.params.as_ref().unwrap().to_system()?;
    let opts = SimOptions {
        t_end: EndTime {
            value: grid.t_end,
            unit: grid.unit.to_unit(),
        },
        samples: grid.samples,
        method: config.solver.method.to_method(),
        tol: config.solver.tolerances(),
        seed: config.solver.seed(),
    };
    let traj = simulate_with(&params, &opts)?;
    write_run_artifacts(&subdir, &point_config, &traj, svg_on)?;
    Ok(pulse_metrics(&traj)?)
}

pub fn run(config: &RunConfig, out_dir: &Path, svg_on: bool) -> CliResult<()> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep requires a [sweep] section".into()))?;
    ensure_dir(out_dir)?;

    let results: Vec<CliResult<PulseMetrics>> = sweep
        .omega_bar
        .par_iter()
        .map(|&ob| run_point(config, out_dir, svg_on, ob))
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    for (&ob, result) in sweep.omega_bar.iter().zip(results) {
        let metrics = result?;
        let peak_or_nan = |p: &Option<lambda_sr::peaks::Peak>| match p {
            Some(pk) => (pk.time, pk.value),
            None => (f64::NAN, f64::NAN),
        };
        let (i1_t, i1_v) = peak_or_nan(&metrics.i1_main);
        let (i2_t, i2_v) = peak_or_nan(&metrics.i2_main);
        let (p1, p2, p3) = match metrics.at_i2_peak {
            Some(s) => (s.p1_over_n, s.p2_over_n, s.p3_over_n),
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        rows.push([
            ob,
            i1_t,
            i1_v,
            i2_t,
            i2_v,
            metrics.i1_energy,
            metrics.i2_energy,
            p1,
            p2,
            p3,
        ]);
    }

    let summary_path = out_dir.join(SUMMARY_FILE);
    let mut out = fs::File::create(&summary_path)?;
    writeln!(out, "{}", SUMMARY_COLUMNS.join(","))?;
    for row in &rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }

    manifest::write_manifest(out_dir, config, None, None, &[SUMMARY_FILE.to_string()])?;
    println!(
        "sweep: {} points -> {} (+ {})",
        sweep.omega_bar.len(),
        out_dir.display(),
        SUMMARY_FILE
    );
    Ok(())
}
