//! Adaptive ODE integration with dense output on a caller-supplied grid.
//!
//! Two steppers are provided: an explicit Dormand–Prince 5(4) pair for
//! smooth non-stiff dynamics and a four-stage Rosenbrock 4(3) method with
//! a finite-difference Jacobian for stiff regimes (widely separated decay
//! rates). The `Auto` method starts explicit and hands over to the
//! Rosenbrock stepper if the step controller collapses the step size.

mod rk45;
mod rosenbrock;

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative/absolute error control and step-size limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative tolerance per component.
    pub rel: f64,
    /// Absolute tolerance floor per component.
    pub abs: f64,
    /// Largest step the controller may take (integration time units).
    pub max_step: f64,
    /// Smallest step before the integrator reports failure.
    pub min_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 1e-14,
            max_step: f64::INFINITY,
            min_step: 1e-14,
        }
    }
}

impl Tolerances {
    /// Scales both error tolerances by a common factor, keeping step limits.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            rel: self.rel * factor,
            abs: self.abs * factor,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel > 0.0 && self.rel.is_finite()) || !(self.abs > 0.0 && self.abs.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "tolerances must be positive and finite, got rel={} abs={}",
                self.rel, self.abs
            )));
        }
        if self.rel >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "relative tolerance {} is too loose for error control",
                self.rel
            )));
        }
        if !(self.min_step > 0.0) || !(self.max_step > self.min_step) {
            return Err(Error::InvalidParams(format!(
                "step limits must satisfy 0 < min_step < max_step, got min={} max={}",
                self.min_step, self.max_step
            )));
        }
        Ok(())
    }
}

/// Stepper selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Explicit Dormand–Prince 5(4).
    Rk45,
    /// Linearly implicit Rosenbrock 4(3) for stiff systems.
    Rosenbrock,
    /// Start explicit, switch to Rosenbrock on step-size collapse.
    Auto,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk45 => "rk45",
            Method::Rosenbrock => "rosenbrock",
            Method::Auto => "auto",
        }
    }
}

/// Work counters and the stepper that finished the run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolverStats {
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    pub rhs_evaluations: u64,
    pub jacobian_evaluations: u64,
    /// Time at which `Auto` handed over to the stiff stepper, if it did.
    pub switched_at: Option<f64>,
    /// Name of the stepper that produced the final segment.
    pub final_method: &'static str,
}

/// Integration result sampled on the requested output grid.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: SolverStats,
}

/// Right-hand side contract: writes dy/dt into `dydt`.
pub trait Rhs {
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]);
    fn dim(&self) -> usize;
}

impl<F: Fn(f64, &[f64], &mut [f64])> Rhs for (usize, F) {
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        (self.1)(t, y, dydt)
    }
    fn dim(&self) -> usize {
        self.0
    }
}

/// Ratio of the proposed step to `min_step` below which `Auto` abandons the
/// explicit stepper instead of failing outright.
pub(crate) const AUTO_SWITCH_FLOOR: f64 = 32.0;

/// Integrates `rhs` from `t_span.0` to `t_span.1`, sampling the solution on
/// `output_grid` via each stepper's dense interpolant.
///
/// The grid must be strictly increasing and contained in `t_span`. Step-size
/// underflow and non-finite right-hand sides are reported as integration
/// errors carrying the last trusted time.
pub fn integrate<R: Rhs>(
    rhs: &R,
    y0: &[f64],
    t_span: (f64, f64),
    tol: &Tolerances,
    output_grid: &[f64],
    method: Method,
) -> Result<GridSolution> {
    tol.validate()?;
    let (t0, t1) = t_span;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidParams(format!(
            "integration span must be finite and increasing, got [{t0}, {t1}]"
        )));
    }
    if y0.len() != rhs.dim() {
        return Err(Error::InvalidParams(format!(
            "state dimension {} does not match system dimension {}",
            y0.len(),
            rhs.dim()
        )));
    }
    if output_grid.is_empty() {
        return Err(Error::InvalidParams("output grid is empty".into()));
    }
    for w in output_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParams(
                "output grid must be strictly increasing".into(),
            ));
        }
    }
    let slack = 1e-9 * (t1 - t0).abs().max(1.0);
    if output_grid[0] < t0 - slack || *output_grid.last().unwrap() > t1 + slack {
        return Err(Error::InvalidParams(format!(
            "output grid [{}, {}] exceeds integration span [{t0}, {t1}]",
            output_grid[0],
            output_grid.last().unwrap()
        )));
    }

    let mut sink = GridSink::new(output_grid, y0, t0);
    let mut stats = SolverStats::default();

    match method {
        Method::Rk45 => {
            rk45::drive(rhs, y0, t0, t1, tol, &mut sink, &mut stats, false)
                .map_err(rk45::DriveAbort::into_error)?;
            stats.final_method = "rk45";
        }
        Method::Rosenbrock => {
            rosenbrock::drive(rhs, y0, t0, t1, tol, &mut sink, &mut stats)?;
            stats.final_method = "rosenbrock";
        }
        Method::Auto => {
            match rk45::drive(rhs, y0, t0, t1, tol, &mut sink, &mut stats, true) {
                Ok(()) => {
                    stats.final_method = "rk45";
                }
                Err(rk45::DriveAbort::Handover { t, y }) => {
                    stats.switched_at = Some(t);
                    rosenbrock::drive(rhs, &y, t, t1, tol, &mut sink, &mut stats)?;
                    stats.final_method = "rosenbrock";
                }
                Err(rk45::DriveAbort::Fail(e)) => return Err(e),
            }
        }
    }

    let (times, states) = sink.finish();
    Ok(GridSolution {
        times,
        states,
        stats,
    })
}

/// Collects dense-output samples at the requested grid points as steps land.
pub(crate) struct GridSink<'a> {
    grid: &'a [f64],
    next: usize,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

impl<'a> GridSink<'a> {
    fn new(grid: &'a [f64], y0: &[f64], t0: f64) -> Self {
        let mut sink = Self {
            grid,
            next: 0,
            times: Vec::with_capacity(grid.len()),
            states: Vec::with_capacity(grid.len()),
        };
        // Grid points at (or numerically before) the initial time take the
        // initial state directly.
        let cutoff = t0 + 1e-12 * t0.abs().max(1.0);
        while sink.next < grid.len() && grid[sink.next] <= cutoff {
            sink.times.push(grid[sink.next]);
            sink.states.push(y0.to_vec());
            sink.next += 1;
        }
        sink
    }

    /// True once every grid point has been emitted.
    pub(crate) fn done(&self) -> bool {
        self.next >= self.grid.len()
    }

    /// Hands each pending grid time in `(t_old, t_new]` to the interpolant.
    pub(crate) fn drain<F: FnMut(f64, &mut [f64])>(
        &mut self,
        t_old: f64,
        t_new: f64,
        dim: usize,
        mut interpolate: F,
    ) {
        while self.next < self.grid.len() {
            let tg = self.grid[self.next];
            if tg > t_new {
                break;
            }
            debug_assert!(tg > t_old || (tg - t_old).abs() < 1e-9 * t_new.abs().max(1.0));
            let mut y = vec![0.0; dim];
            interpolate(tg, &mut y);
            self.times.push(tg);
            self.states.push(y);
            self.next += 1;
        }
    }

    fn finish(self) -> (Vec<f64>, Vec<Vec<f64>>) {
        (self.times, self.states)
    }
}

/// Weighted RMS error norm shared by both steppers: the step is accepted
/// when the norm is at most one.
pub(crate) fn error_norm(err: &[f64], y_old: &[f64], y_new: &[f64], tol: &Tolerances) -> f64 {
    let mut acc = 0.0;
    for i in 0..err.len() {
        let scale = tol.abs + tol.rel * y_old[i].abs().max(y_new[i].abs());
        let r = err[i] / scale;
        acc += r * r;
    }
    (acc / err.len() as f64).sqrt()
}

/// Initial step-size guess from the local derivative scale.
pub(crate) fn initial_step<R: Rhs>(
    rhs: &R,
    t0: f64,
    t1: f64,
    y0: &[f64],
    tol: &Tolerances,
    order: f64,
    stats: &mut SolverStats,
) -> f64 {
    let n = y0.len();
    let mut f0 = vec![0.0; n];
    rhs.eval(t0, y0, &mut f0);
    stats.rhs_evaluations += 1;
    let mut d0 = 0.0_f64;
    let mut d1 = 0.0_f64;
    for i in 0..n {
        let scale = tol.abs + tol.rel * y0[i].abs();
        d0 += (y0[i] / scale).powi(2);
        d1 += (f0[i] / scale).powi(2);
    }
    let d0 = (d0 / n as f64).sqrt();
    let d1 = (d1 / n as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min((t1 - t0) * 0.5);

    let mut y1 = vec![0.0; n];
    for i in 0..n {
        y1[i] = y0[i] + h0 * f0[i];
    }
    let mut f1 = vec![0.0; n];
    rhs.eval(t0 + h0, &y1, &mut f1);
    stats.rhs_evaluations += 1;
    let mut d2 = 0.0_f64;
    for i in 0..n {
        let scale = tol.abs + tol.rel * y0[i].abs();
        d2 += ((f1[i] - f0[i]) / scale).powi(2);
    }
    let d2 = (d2 / n as f64).sqrt() / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(1.0 / (order + 1.0))
    };
    h1.min(100.0 * h0)
        .min(t1 - t0)
        .min(tol.max_step)
        .max(tol.min_step)
}

pub(crate) fn check_finite(t: f64, y: &[f64]) -> Result<()> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integration {
            t_last: t,
            reason: "state became non-finite".into(),
        });
    }
    Ok(())
}
