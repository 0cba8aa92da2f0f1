//! `single-atom`: closed-form decay of one undriven atom, written in the
//! same trajectory format as the solvers so `compare` can check them
//! against it.

use std::path::Path;

use lambda_sr::analysis::single_atom_decay;
use lambda_sr::params::nondimensionalize;
use lambda_sr::trajectory::{conversion_factor, TimeUnit, Trajectory, TrajectoryMeta};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

use super::write_run_artifacts;

pub fn run(config: &RunConfig, out_dir: &Path, svg_on: bool) -> CliResult<()> {
    let params = config
        .params
        .as_ref()
        .ok_or_else(|| CliError::Config("single-atom requires [params]".into()))?
        .to_system()?;
    if params.n_atoms != 1 {
        return Err(CliError::Config(format!(
            "single-atom requires n_atoms = 1, got {}",
            params.n_atoms
        )));
    }
    if params.rabi != 0.0 {
        return Err(CliError::Config(
            "single-atom covers the undriven closed form; set rabi = 0 \
             (use exact mode for a driven atom)"
                .into(),
        ));
    }
    let grid = config
        .grid
        .as_ref()
        .ok_or_else(|| CliError::Config("single-atom requires [grid]".into()))?;

    let scaled = nondimensionalize(&params);
    let unit = grid.unit.to_unit();
    let to_physical = conversion_factor(&scaled, unit, TimeUnit::Physical)?;

    let s33_0 = params.initial_excited as f64;
    let p1_0 = 1.0 - s33_0;
    let total = params.gamma1 + params.gamma2;
    let branch1 = params.gamma1 / total;
    let branch2 = params.gamma2 / total;

    let samples = grid.samples;
    let mut traj = Trajectory {
        time_unit: unit,
        times: Vec::with_capacity(samples + 1),
        p1_over_n: Vec::new(),
        p2_over_n: Vec::new(),
        p3_over_n: Vec::new(),
        re_c12_over_n: Vec::new(),
        im_c12_over_n: Vec::new(),
        i1: Vec::new(),
        i2: Vec::new(),
        d_mm: Vec::new(),
        d_pp: Vec::new(),
        re_cross: Vec::new(),
        im_cross: Vec::new(),
        meta: TrajectoryMeta {
            params: params.clone(),
            scaled,
            seed_policy: "none".into(),
            tolerances: config.solver.tolerances(),
            method: "analytic".into(),
            stats: None,
            engine_version: lambda_sr::ENGINE_VERSION.into(),
        },
    };
    for k in 0..=samples {
        let t = grid.t_end * k as f64 / samples as f64;
        let p3 = single_atom_decay(t * to_physical, params.gamma1, params.gamma2, s33_0);
        let emitted = s33_0 - p3;
        traj.times.push(t);
        traj.p1_over_n.push(p1_0 + branch1 * emitted);
        traj.p2_over_n.push(branch2 * emitted);
        traj.p3_over_n.push(p3);
        traj.re_c12_over_n.push(0.0);
        traj.im_c12_over_n.push(0.0);
        traj.i1.push(0.0);
        traj.i2.push(0.0);
        traj.d_mm.push(0.0);
        traj.d_pp.push(0.0);
        traj.re_cross.push(0.0);
        traj.im_cross.push(0.0);
    }

    write_run_artifacts(out_dir, config, &traj, svg_on)?;
    println!(
        "single-atom: closed form over {} samples -> {}",
        traj.len(),
        out_dir.display()
    );
    Ok(())
}
