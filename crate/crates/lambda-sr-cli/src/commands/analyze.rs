//! `analyze`: pulse metrics and sum-rule audit of a finished run.

use std::fs;
use std::path::Path;

use lambda_sr::analysis::pulse_metrics;
use lambda_sr::params::{nondimensionalize, SystemParams};
use lambda_sr::trajectory::{TimeUnit, Trajectory, TrajectoryMeta};

use crate::config::RunConfig;
use crate::csvio;
use crate::error::{CliError, CliResult};
use crate::manifest;

use super::{ensure_dir, metrics_to_json, TRAJECTORY_FILE};

pub const METRICS_FILE: &str = "metrics.json";

/// Rebuilds an in-memory trajectory from a run directory's CSV, taking
/// the physical parameters from the run manifest when one is present.
pub fn load_trajectory(run_dir: &Path) -> CliResult<Trajectory> {
    let table = csvio::read_trajectory_table(&run_dir.join(TRAJECTORY_FILE))?;
    let params = match manifest::read_manifest_config(run_dir) {
        Ok(config) => match config.params {
            Some(p) => p.to_system()?,
            None => placeholder_params(),
        },
        Err(_) => placeholder_params(),
    };
    let scaled = nondimensionalize(&params);
    let col = |name: &str| -> CliResult<Vec<f64>> {
        table
            .column(name)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| CliError::Config(format!("trajectory CSV lacks column {name}")))
    };
    let traj = Trajectory {
        time_unit: TimeUnit::FastScaled,
        times: col("t_scaled_fast")?,
        p1_over_n: col("p1_over_N")?,
        p2_over_n: col("p2_over_N")?,
        p3_over_n: col("p3_over_N")?,
        re_c12_over_n: col("re_c12_over_N")?,
        im_c12_over_n: col("im_c12_over_N")?,
        i1: col("I1")?,
        i2: col("I2")?,
        d_mm: col("d_mm")?,
        d_pp: col("d_pp")?,
        re_cross: col("re_cross")?,
        im_cross: col("im_cross")?,
        meta: TrajectoryMeta {
            params,
            scaled,
            seed_policy: "unknown".into(),
            tolerances: Default::default(),
            method: "loaded".into(),
            stats: None,
            engine_version: lambda_sr::ENGINE_VERSION.into(),
        },
    };
    Ok(traj)
}

/// Stand-in parameters for a directory without a readable manifest; the
/// pulse metrics depend only on the sampled columns.
fn placeholder_params() -> SystemParams {
    SystemParams::inverted(2, 1.0, 1.0, 1.0, 1.0, 0.0)
}

/// Worst relative violation of I1 + I2 = 2(d_mm + d_pp) over the run.
pub fn sum_rule_residual(traj: &Trajectory) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..traj.len() {
        let total = traj.i1[k] + traj.i2[k];
        let dressed = 2.0 * (traj.d_mm[k] + traj.d_pp[k]);
        let rel = (total - dressed).abs() / (total.abs() + 1e-300);
        worst = worst.max(rel);
    }
    worst
}

pub fn run(config: &RunConfig, out_dir: &Path) -> CliResult<()> {
    let section = config
        .analyze
        .as_ref()
        .ok_or_else(|| CliError::Config("analyze requires an [analyze] section".into()))?;
    let traj = load_trajectory(&section.run)?;
    let metrics = pulse_metrics(&traj)?;
    let residual = sum_rule_residual(&traj);

    let mut doc = metrics_to_json(&metrics);
    doc["sum_rule_max_rel_residual"] = serde_json::json!(residual);
    doc["samples"] = serde_json::json!(traj.len());
    ensure_dir(out_dir)?;
    let path = out_dir.join(METRICS_FILE);
    fs::write(&path, format!("{:#}\n", doc))?;

    println!("analyze: {} -> {}", section.run.display(), path.display());
    match &metrics.i1_main {
        Some(pk) => println!("  I1 peak {:.6e} at t={:.4}", pk.value, pk.time),
        None => println!("  I1: no peak found"),
    }
    match &metrics.i2_main {
        Some(pk) => println!("  I2 peak {:.6e} at t={:.4}", pk.value, pk.time),
        None => println!("  I2: no peak found"),
    }
    println!(
        "  energies: I1 {:.6e}, I2 {:.6e}; sum-rule max rel residual {:.3e}",
        metrics.i1_energy, metrics.i2_energy, residual
    );
    Ok(())
}
