//! Dormand–Prince 5(4) explicit stepper with FSAL reuse, a PI step-size
//! controller, and the matching fourth-order dense interpolant.

use super::{
    check_finite, error_norm, initial_step, GridSink, Rhs, SolverStats, Tolerances,
    AUTO_SWITCH_FLOOR,
};
use crate::error::Error;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference between the fifth-order solution weights and the embedded
// fourth-order weights; contracts against the stage slopes to give the
// local error estimate.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense-output weights for the quartic interpolant.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Why an `Auto` run left the explicit stepper.
pub(crate) enum DriveAbort {
    /// Stiffness detected (step size collapsed, persistent rejection, or
    /// stability-limited stepping); continue with the stiff stepper from
    /// (t, y).
    Handover { t: f64, y: Vec<f64> },
    Fail(Error),
}

impl From<Error> for DriveAbort {
    fn from(e: Error) -> Self {
        DriveAbort::Fail(e)
    }
}

impl DriveAbort {
    /// Collapses the handover case for callers that forbade it.
    pub(crate) fn into_error(self) -> Error {
        match self {
            DriveAbort::Fail(e) => e,
            DriveAbort::Handover { t, .. } => Error::Integration {
                t_last: t,
                reason: "step size collapsed below the stiffness floor".into(),
            },
        }
    }
}

/// Runs the stepper across `[t0, t1]`, draining grid samples into `sink`.
///
/// With `allow_handover`, persistent step collapse returns
/// `DriveAbort::Handover` instead of an error so the caller can switch to
/// the stiff stepper.
#[allow(clippy::too_many_arguments)]
pub(crate) fn drive<R: Rhs>(
    rhs: &R,
    y0: &[f64],
    t0: f64,
    t1: f64,
    tol: &Tolerances,
    sink: &mut GridSink,
    stats: &mut SolverStats,
    allow_handover: bool,
) -> std::result::Result<(), DriveAbort> {
    let n = rhs.dim();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    rhs.eval(t, &y, &mut k1);
    stats.rhs_evaluations += 1;
    check_finite(t, &k1).map_err(rewrap(t))?;

    let mut h = initial_step(rhs, t0, t1, y0, tol, 5.0, stats);
    let mut err_prev: f64 = 1.0;

    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut yerr = vec![0.0; n];

    let mut consecutive_rejects = 0u32;
    let mut stiff_steps = 0u32;
    let mut nonstiff_steps = 0u32;

    while t < t1 {
        h = h.min(t1 - t).min(tol.max_step);
        if h < tol.min_step {
            if allow_handover {
                return Err(DriveAbort::Handover { t, y });
            }
            return Err(Error::Integration {
                t_last: t,
                reason: format!("step size {h:.3e} underflowed the explicit stepper"),
            }
            .into());
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs.eval(t + C2 * h, &ytmp, &mut k2);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs.eval(t + C3 * h, &ytmp, &mut k3);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs.eval(t + C4 * h, &ytmp, &mut k4);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs.eval(t + C5 * h, &ytmp, &mut k5);
        for i in 0..n {
            ytmp[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs.eval(t + h, &ytmp, &mut k6);
        for i in 0..n {
            ynew[i] = y[i]
                + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        rhs.eval(t + h, &ynew, &mut k7);
        stats.rhs_evaluations += 6;

        if ynew.iter().any(|v| !v.is_finite()) || k7.iter().any(|v| !v.is_finite()) {
            stats.steps_rejected += 1;
            h *= 0.25;
            consecutive_rejects += 1;
            if consecutive_rejects > 60 {
                return Err(Error::Integration {
                    t_last: t,
                    reason: "right-hand side repeatedly non-finite".into(),
                }
                .into());
            }
            continue;
        }

        for i in 0..n {
            yerr[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = error_norm(&yerr, &y, &ynew, tol).max(1e-16);

        if err <= 1.0 {
            consecutive_rejects = 0;
            stats.steps_accepted += 1;
            let t_new = t + h;

            if !sink.done() {
                // Quartic interpolant over the accepted step.
                let mut rcont = vec![[0.0; 5]; n];
                for i in 0..n {
                    let ydiff = ynew[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    rcont[i][0] = y[i];
                    rcont[i][1] = ydiff;
                    rcont[i][2] = bspl;
                    rcont[i][3] = ydiff - h * k7[i] - bspl;
                    rcont[i][4] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                sink.drain(t, t_new, n, |tg, out| {
                    let theta = (tg - t) / h;
                    let th1 = 1.0 - theta;
                    for i in 0..n {
                        let r = &rcont[i];
                        out[i] =
                            r[0] + theta * (r[1] + th1 * (r[2] + theta * (r[3] + th1 * r[4])));
                    }
                });
            }

            // Dominant-eigenvalue probe: ‖f(ynew) − f(y₆)‖/‖ynew − y₆‖
            // estimates |λ| from the two derivative evaluations at t + h.
            // Accepted steps riding above the explicit stability bound
            // (≈ 3.3 on the negative real axis) mean the step size is
            // stability-limited, not accuracy-limited: the problem is
            // stiff.
            let mut hand_over_now = false;
            if allow_handover {
                let mut stnum = 0.0;
                let mut stden = 0.0;
                for i in 0..n {
                    stnum += (k7[i] - k6[i]).powi(2);
                    stden += (ynew[i] - ytmp[i]).powi(2);
                }
                if stden > 0.0 && h * (stnum / stden).sqrt() > 3.25 {
                    stiff_steps += 1;
                    nonstiff_steps = 0;
                } else {
                    nonstiff_steps += 1;
                    if nonstiff_steps >= 6 {
                        stiff_steps = 0;
                    }
                }
                hand_over_now = stiff_steps >= 15;
            }

            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            if hand_over_now {
                return Err(DriveAbort::Handover { t, y });
            }

            // PI controller: damp growth using the previous error.
            let fac = 0.9 * err.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h *= fac.clamp(0.2, 10.0);
            err_prev = err;
        } else {
            stats.steps_rejected += 1;
            consecutive_rejects += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if allow_handover
                && (consecutive_rejects > 30 || h < AUTO_SWITCH_FLOOR * tol.min_step)
            {
                return Err(DriveAbort::Handover { t, y });
            }
            if consecutive_rejects > 100 {
                return Err(Error::Integration {
                    t_last: t,
                    reason: "step controller failed to find an acceptable step".into(),
                }
                .into());
            }
        }
    }
    Ok(())
}

fn rewrap(t: f64) -> impl Fn(Error) -> DriveAbort {
    move |e| match e {
        Error::Integration { reason, .. } => DriveAbort::Fail(Error::Integration {
            t_last: t,
            reason,
        }),
        other => DriveAbort::Fail(other),
    }
}
