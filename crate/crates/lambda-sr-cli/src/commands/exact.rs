//! `exact`: small-N master-equation run with full pair observables.

use std::path::Path;

use lambda_sr::dressed::dressed_transform;
use lambda_sr::oracle::{build_liouvillian, collective_correlators, evolve, DensityMatrix};
use lambda_sr::params::nondimensionalize;
use lambda_sr::state;
use lambda_sr::trajectory::{conversion_factor, TimeUnit, Trajectory, TrajectoryMeta};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

use super::write_run_artifacts;

pub fn run(config: &RunConfig, out_dir: &Path, svg_on: bool) -> CliResult<()> {
    let params = config
        .params
        .as_ref()
        .ok_or_else(|| CliError::Config("exact requires [params]".into()))?
        .to_system()?;
    let coupling = config.geometry.clone().unwrap_or_default().to_coupling()?;
    let grid = config
        .grid
        .as_ref()
        .ok_or_else(|| CliError::Config("exact requires [grid]".into()))?;

    let scaled = nondimensionalize(&params);
    let unit = grid.unit.to_unit();
    let to_physical = conversion_factor(&scaled, unit, TimeUnit::Physical)?;

    let n = params.n_atoms as usize;
    let liouvillian = build_liouvillian(&params, &coupling)?;
    let mut levels = vec![1u8; n];
    for lv in levels.iter_mut().take(params.initial_excited as usize) {
        *lv = 3;
    }
    let rho0 = DensityMatrix::product_state(&levels)?;

    let samples = grid.samples;
    let t_grid: Vec<f64> = (0..=samples)
        .map(|k| grid.t_end * to_physical * k as f64 / samples as f64)
        .collect();
    let tol = config.solver.tolerances();
    let states = evolve(&rho0, &liouvillian, &t_grid, &tol)?;

    let mut traj = Trajectory {
        time_unit: unit,
        times: (0..=samples)
            .map(|k| grid.t_end * k as f64 / samples as f64)
            .collect(),
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
            tolerances: tol,
            method: "rk45".into(),
            stats: None,
            engine_version: lambda_sr::ENGINE_VERSION.into(),
        },
    };
    let nf = params.n();
    for rho in &states {
        let c = collective_correlators(rho)?;
        let (i1, i2) = state::intensities(&c);
        let dd = dressed_transform(c.q11, c.q22, c.q12, params.n_atoms);
        traj.p1_over_n.push(c.p1 / nf);
        traj.p2_over_n.push(c.p2 / nf);
        traj.p3_over_n.push(c.p3 / nf);
        traj.re_c12_over_n.push(c.c12.re / nf);
        traj.im_c12_over_n.push(c.c12.im / nf);
        traj.i1.push(i1);
        traj.i2.push(i2);
        traj.d_mm.push(dd.d_mm);
        traj.d_pp.push(dd.d_pp);
        traj.re_cross.push(dd.cross.re);
        traj.im_cross.push(dd.cross.im);
    }

    write_run_artifacts(out_dir, config, &traj, svg_on)?;
    println!(
        "exact: N={} dim={} samples={} -> {}",
        params.n_atoms,
        liouvillian.dim(),
        traj.len(),
        out_dir.display()
    );
    Ok(())
}
