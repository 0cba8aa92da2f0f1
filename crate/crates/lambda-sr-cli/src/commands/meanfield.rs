//! `meanfield`: correlator-closure run over the configured grid.

use std::path::Path;

use lambda_sr::meanfield::{simulate_with, EndTime, SimOptions};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

use super::write_run_artifacts;

pub fn run(config: &RunConfig, out_dir: &Path, svg_on: bool) -> CliResult<()> {
    let params = config
        .params
        .as_ref()
        .ok_or_else(|| CliError::Config("meanfield requires [params]".into()))?
        .to_system()?;
    if let Some(geometry) = &config.geometry {
        if !geometry.dicke || geometry.positions.is_some() {
            return Err(CliError::Config(
                "meanfield: the correlator closure assumes identical pair couplings; \
                 set geometry.dicke = true or drop the [geometry] section"
                    .into(),
            ));
        }
    }
    let grid = config
        .grid
        .as_ref()
        .ok_or_else(|| CliError::Config("meanfield requires [grid]".into()))?;

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
    write_run_artifacts(out_dir, config, &traj, svg_on)?;

    let last = traj.len() - 1;
    println!(
        "meanfield: N={} samples={} -> {}",
        params.n_atoms,
        traj.len(),
        out_dir.display()
    );
    println!(
        "  final p1/N={:.6} p2/N={:.6} p3/N={:.6}",
        traj.p1_over_n[last], traj.p2_over_n[last], traj.p3_over_n[last]
    );
    Ok(())
}
