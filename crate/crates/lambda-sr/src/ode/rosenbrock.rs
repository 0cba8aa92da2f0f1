//! Four-stage Rosenbrock 4(3) stepper (Kaps–Rentrop scheme with Shampine's
//! coefficients). Linearly implicit: each stage solves against the matrix
//! I/(γh) − J, so stiff decay rates cost one LU factorization per step
//! instead of a collapsed explicit step size. The Jacobian and the explicit
//! time derivative of the right-hand side are formed by forward differences.
//!
//! Known limitation: the scheme is not stiffly accurate, so on problems
//! whose stiffness is driven through a forcing term (y' = −λ(y − φ(t)) + φ̇
//! with λh ≫ 1) the observed stiff order drops and the controller keeps h
//! smaller than the smooth solution alone would need. Results stay within
//! tolerance; the cost is extra steps on that problem class.

use super::{check_finite, error_norm, initial_step, GridSink, Rhs, SolverStats, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::Lu;

const GAM: f64 = 0.5;
const A21: f64 = 2.0;
const A31: f64 = 48.0 / 25.0;
const A32: f64 = 6.0 / 25.0;
const C21: f64 = -8.0;
const C31: f64 = 372.0 / 25.0;
const C32: f64 = 12.0 / 5.0;
const C41: f64 = -112.0 / 125.0;
const C42: f64 = -54.0 / 125.0;
const C43: f64 = -2.0 / 5.0;
const B1: f64 = 19.0 / 9.0;
const B2: f64 = 1.0 / 2.0;
const B3: f64 = 25.0 / 108.0;
const B4: f64 = 125.0 / 108.0;
const E1: f64 = 17.0 / 54.0;
const E2: f64 = 7.0 / 36.0;
const E3: f64 = 0.0;
const E4: f64 = 125.0 / 108.0;
const C1X: f64 = 1.0 / 2.0;
const C2X: f64 = -3.0 / 2.0;
const C3X: f64 = 121.0 / 50.0;
const C4X: f64 = 29.0 / 250.0;
const A2X: f64 = 1.0;
const A3X: f64 = 3.0 / 5.0;

const SQRT_EPS: f64 = 1.4901161193847656e-8;

fn numerical_jacobian<R: Rhs>(
    rhs: &R,
    t: f64,
    y: &[f64],
    f0: &[f64],
    stats: &mut SolverStats,
) -> Vec<f64> {
    let n = y.len();
    let mut jac = vec![0.0; n * n];
    let mut yp = y.to_vec();
    let mut fp = vec![0.0; n];
    for j in 0..n {
        let dy = SQRT_EPS * y[j].abs().max(1e-6);
        yp[j] = y[j] + dy;
        rhs.eval(t, &yp, &mut fp);
        yp[j] = y[j];
        let inv = 1.0 / dy;
        for i in 0..n {
            jac[i * n + j] = (fp[i] - f0[i]) * inv;
        }
    }
    stats.rhs_evaluations += n as u64;
    stats.jacobian_evaluations += 1;
    jac
}

fn time_derivative<R: Rhs>(
    rhs: &R,
    t: f64,
    h: f64,
    y: &[f64],
    f0: &[f64],
    stats: &mut SolverStats,
) -> Vec<f64> {
    let n = y.len();
    let dt = SQRT_EPS * t.abs().max(h.abs());
    let mut ft = vec![0.0; n];
    rhs.eval(t + dt, y, &mut ft);
    stats.rhs_evaluations += 1;
    for i in 0..n {
        ft[i] = (ft[i] - f0[i]) / dt;
    }
    ft
}

pub(crate) fn drive<R: Rhs>(
    rhs: &R,
    y0: &[f64],
    t0: f64,
    t1: f64,
    tol: &Tolerances,
    sink: &mut GridSink,
    stats: &mut SolverStats,
) -> Result<()> {
    let n = rhs.dim();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut f0 = vec![0.0; n];
    rhs.eval(t, &y, &mut f0);
    stats.rhs_evaluations += 1;
    check_finite(t, &f0).map_err(|_| Error::Integration {
        t_last: t,
        reason: "right-hand side non-finite at segment start".into(),
    })?;

    let mut h = initial_step(rhs, t0, t1, &y, tol, 4.0, stats);

    let mut g1 = vec![0.0; n];
    let mut g2 = vec![0.0; n];
    let mut g3 = vec![0.0; n];
    let mut g4 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut fstage = vec![0.0; n];
    let mut yerr = vec![0.0; n];

    let mut consecutive_rejects = 0u32;
    let mut rejected_since_accept = false;

    while t < t1 {
        h = h.min(t1 - t).min(tol.max_step);
        if h < tol.min_step {
            return Err(Error::Integration {
                t_last: t,
                reason: format!("step size {h:.3e} underflowed the stiff stepper"),
            });
        }

        let jac = numerical_jacobian(rhs, t, &y, &f0, stats);
        let ft = time_derivative(rhs, t, h, &y, &f0, stats);

        // Stage matrix I/(γh) − J, refactorized when the step shrinks.
        let mut accepted = false;
        while !accepted {
            if h < tol.min_step {
                return Err(Error::Integration {
                    t_last: t,
                    reason: format!("step size {h:.3e} underflowed the stiff stepper"),
                });
            }
            let mut a = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    a[i * n + j] = -jac[i * n + j];
                }
                a[i * n + i] += 1.0 / (GAM * h);
            }
            let lu = match Lu::factorize(a, n) {
                Ok(lu) => lu,
                Err(_) => {
                    stats.steps_rejected += 1;
                    h *= 0.5;
                    continue;
                }
            };

            for i in 0..n {
                g1[i] = f0[i] + h * C1X * ft[i];
            }
            lu.solve(&mut g1);

            for i in 0..n {
                ytmp[i] = y[i] + A21 * g1[i];
            }
            rhs.eval(t + A2X * h, &ytmp, &mut fstage);
            for i in 0..n {
                g2[i] = fstage[i] + h * C2X * ft[i] + C21 * g1[i] / h;
            }
            lu.solve(&mut g2);

            for i in 0..n {
                ytmp[i] = y[i] + A31 * g1[i] + A32 * g2[i];
            }
            rhs.eval(t + A3X * h, &ytmp, &mut fstage);
            for i in 0..n {
                g3[i] = fstage[i] + h * C3X * ft[i] + (C31 * g1[i] + C32 * g2[i]) / h;
            }
            lu.solve(&mut g3);

            // Fourth stage reuses the third-stage function value.
            for i in 0..n {
                g4[i] =
                    fstage[i] + h * C4X * ft[i] + (C41 * g1[i] + C42 * g2[i] + C43 * g3[i]) / h;
            }
            lu.solve(&mut g4);
            stats.rhs_evaluations += 2;

            for i in 0..n {
                ynew[i] = y[i] + B1 * g1[i] + B2 * g2[i] + B3 * g3[i] + B4 * g4[i];
                yerr[i] = E1 * g1[i] + E2 * g2[i] + E3 * g3[i] + E4 * g4[i];
            }

            if ynew.iter().any(|v| !v.is_finite()) {
                stats.steps_rejected += 1;
                consecutive_rejects += 1;
                if consecutive_rejects > 60 {
                    return Err(Error::Integration {
                        t_last: t,
                        reason: "stiff stepper produced non-finite iterates".into(),
                    });
                }
                h *= 0.25;
                continue;
            }

            let err = error_norm(&yerr, &y, &ynew, tol).max(1e-16);
            if err <= 1.0 {
                accepted = true;
                consecutive_rejects = 0;
                stats.steps_accepted += 1;
                let t_new = t + h;

                let mut f_new = vec![0.0; n];
                rhs.eval(t_new, &ynew, &mut f_new);
                stats.rhs_evaluations += 1;
                check_finite(t_new, &f_new)?;

                if !sink.done() {
                    // Cubic Hermite interpolation over the accepted step.
                    let (ya, fa, yb, fb) = (&y, &f0, &ynew, &f_new);
                    sink.drain(t, t_new, n, |tg, out| {
                        let th = (tg - t) / h;
                        let h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
                        let h10 = th * (1.0 - th) * (1.0 - th);
                        let h01 = th * th * (3.0 - 2.0 * th);
                        let h11 = th * th * (th - 1.0);
                        for i in 0..n {
                            out[i] = h00 * ya[i]
                                + h10 * h * fa[i]
                                + h01 * yb[i]
                                + h11 * h * fb[i];
                        }
                    });
                }

                t = t_new;
                std::mem::swap(&mut y, &mut ynew);
                f0.copy_from_slice(&f_new);
                // After a rejection the error estimate is steeply
                // nonlinear in h around the accepted size; growing again
                // immediately just re-enters the rejection, so hold.
                let growth_cap = if rejected_since_accept { 1.0 } else { 2.0 };
                h *= (0.9 * err.powf(-0.25)).clamp(0.2, growth_cap);
                rejected_since_accept = false;
            } else {
                stats.steps_rejected += 1;
                consecutive_rejects += 1;
                rejected_since_accept = true;
                if consecutive_rejects > 100 {
                    return Err(Error::Integration {
                        t_last: t,
                        reason: "stiff step controller failed to find an acceptable step".into(),
                    });
                }
                h *= (0.9 * err.powf(-1.0 / 3.0)).clamp(0.1, 0.9);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use crate::ode::{integrate, Method, Rhs, Tolerances};
    use approx::assert_relative_eq;

    #[test]
    fn van_der_pol_relaxation_completes() {
        // Classic stiff benchmark: mu = 1000 forces tiny explicit steps but
        // the implicit stepper crosses the slow manifold cheaply.
        struct VdP;
        impl Rhs for VdP {
            fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
                dydt[0] = y[1];
                dydt[1] = 1000.0 * (1.0 - y[0] * y[0]) * y[1] - y[0];
            }
            fn dim(&self) -> usize {
                2
            }
        }
        let tol = Tolerances {
            rel: 1e-6,
            abs: 1e-9,
            ..Tolerances::default()
        };
        let sol = integrate(
            &VdP,
            &[2.0, 0.0],
            (0.0, 500.0),
            &tol,
            &[500.0],
            Method::Rosenbrock,
        )
        .unwrap();
        assert!(sol.states[0][0].abs() < 2.5);
        assert!(sol.stats.steps_accepted < 50_000, "{:?}", sol.stats);
    }

    #[test]
    fn fourth_order_accuracy_on_smooth_problem() {
        struct Decay;
        impl Rhs for Decay {
            fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
                dydt[0] = -0.7 * y[0];
            }
            fn dim(&self) -> usize {
                1
            }
        }
        let tol = Tolerances {
            rel: 1e-10,
            abs: 1e-13,
            ..Tolerances::default()
        };
        let sol = integrate(&Decay, &[2.0], (0.0, 3.0), &tol, &[1.5, 3.0], Method::Rosenbrock)
            .unwrap();
        assert_relative_eq!(sol.states[1][0], 2.0 * (-2.1_f64).exp(), max_relative = 1e-8);
        // Interpolated interior point is one order lower but still tight.
        assert_relative_eq!(sol.states[0][0], 2.0 * (-1.05_f64).exp(), max_relative = 1e-7);
    }
}
