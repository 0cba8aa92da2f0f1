//! One module per subcommand plus the artifact plumbing they share.

pub mod analyze;
pub mod compare;
pub mod exact;
pub mod meanfield;
pub mod single_atom;
pub mod sweep;

use std::fs;
use std::path::Path;

use lambda_sr::analysis::PulseMetrics;
use lambda_sr::trajectory::Trajectory;
use serde_json::json;

use crate::config::RunConfig;
use crate::csvio;
use crate::error::{CliError, CliResult};
use crate::manifest;
use crate::svg::{self, Series};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const POPULATIONS_SVG: &str = "populations.svg";
pub const INTENSITIES_SVG: &str = "intensities.svg";

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| {
        CliError::Config(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })
}

/// Writes the artifact set for one trajectory run: the CSV, the optional
/// two-panel SVG pair, and a manifest hashing everything written.
pub fn write_run_artifacts(
    dir: &Path,
    config: &RunConfig,
    traj: &Trajectory,
    svg_on: bool,
) -> CliResult<()> {
    ensure_dir(dir)?;
    csvio::write_trajectory(&dir.join(TRAJECTORY_FILE), traj)?;
    let mut artifacts = vec![TRAJECTORY_FILE.to_string()];
    if svg_on {
        let log_time = config.run.svg_log_time.unwrap_or(false);
        write_panels(dir, traj, log_time)?;
        artifacts.push(POPULATIONS_SVG.to_string());
        artifacts.push(INTENSITIES_SVG.to_string());
    }
    manifest::write_manifest(
        dir,
        config,
        Some(traj.meta.scaled),
        traj.meta.stats.clone(),
        &artifacts,
    )?;
    Ok(())
}

fn write_panels(dir: &Path, traj: &Trajectory, log_time: bool) -> CliResult<()> {
    let x_label = traj.time_unit.label();
    svg::line_chart(
        &dir.join(POPULATIONS_SVG),
        "populations per atom",
        x_label,
        &traj.times,
        &[
            Series {
                label: "p1/N",
                color: svg::PALETTE[0],
                values: &traj.p1_over_n,
            },
            Series {
                label: "p2/N",
                color: svg::PALETTE[1],
                values: &traj.p2_over_n,
            },
            Series {
                label: "p3/N",
                color: svg::PALETTE[2],
                values: &traj.p3_over_n,
            },
        ],
        log_time,
    )?;
    svg::line_chart(
        &dir.join(INTENSITIES_SVG),
        "channel intensities",
        x_label,
        &traj.times,
        &[
            Series {
                label: "I1",
                color: svg::PALETTE[0],
                values: &traj.i1,
            },
            Series {
                label: "I2",
                color: svg::PALETTE[1],
                values: &traj.i2,
            },
        ],
        log_time,
    )?;
    Ok(())
}

/// Pulse metrics as JSON, shared by `analyze` output and sweep summaries.
pub fn metrics_to_json(metrics: &PulseMetrics) -> serde_json::Value {
    let peak = |p: &lambda_sr::peaks::Peak| {
        json!({ "time": p.time, "value": p.value, "prominence": p.prominence })
    };
    let plateau = |p: &lambda_sr::peaks::Plateau| {
        json!({ "t_start": p.t_start, "t_end": p.t_end, "duration": p.duration() })
    };
    json!({
        "i1_peaks": metrics.i1_peaks.iter().map(peak).collect::<Vec<_>>(),
        "i2_peaks": metrics.i2_peaks.iter().map(peak).collect::<Vec<_>>(),
        "i1_main": metrics.i1_main.as_ref().map(peak),
        "i2_main": metrics.i2_main.as_ref().map(peak),
        "at_i2_peak": metrics.at_i2_peak.map(|s| json!({
            "time": s.time,
            "p1_over_N": s.p1_over_n,
            "p2_over_N": s.p2_over_n,
            "p3_over_N": s.p3_over_n,
            "I1": s.i1,
            "I2": s.i2,
        })),
        "burst_plateau": metrics.burst_plateau.as_ref().map(plateau),
        "longest_p3_plateau": metrics.longest_p3_plateau.as_ref().map(plateau),
        "i1_energy": metrics.i1_energy,
        "i2_energy": metrics.i2_energy,
    })
}
