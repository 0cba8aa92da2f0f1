//! Property tests on whole trajectories: conservation, positivity, the
//! dressed sum rule, and the equal-branching symmetry, across randomly
//! drawn physical parameters.

use lambda_sr::meanfield::{self, EndTime, SeedPolicy, SimOptions};
use lambda_sr::ode::Tolerances;
use lambda_sr::params::SystemParams;
use proptest::prelude::*;

fn quick_options(t_end: f64, seed: f64) -> SimOptions {
    let mut opts = SimOptions::new(EndTime::fast(t_end));
    opts.samples = 200;
    opts.seed = SeedPolicy::Fluctuation { epsilon: seed };
    opts.tol = Tolerances {
        rel: 1e-9,
        abs: 1e-13,
        ..Tolerances::default()
    };
    opts
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        .. ProptestConfig::default()
    })]

    /// Populations stay normalized, intensities stay nonnegative, and the
    /// bare/dressed intensity split agrees pointwise for any admissible
    /// parameter draw.
    #[test]
    fn trajectories_conserve_and_stay_physical(
        log_n in 2.0f64..7.0,
        log_r_gamma in -6.0f64..0.0,
        r_mu in 0.05f64..1.0,
        omega_bar in 0.0f64..1.5,
        log_seed in -6.0f64..-2.0,
    ) {
        let n = 10f64.powf(log_n).round() as u64;
        let gamma1 = 1.0;
        let gamma2 = 10f64.powf(log_r_gamma);
        let mu1 = 1e-2;
        let mu2 = mu1 * r_mu;
        let omega = omega_bar * mu1 * gamma1 * n as f64;
        let params = SystemParams::inverted(n, gamma1, gamma2, mu1, mu2, omega);

        let traj = meanfield::simulate_with(
            &params,
            &quick_options(8.0, 10f64.powf(log_seed)),
        ).unwrap();

        for k in 0..traj.len() {
            let total = traj.p1_over_n[k] + traj.p2_over_n[k] + traj.p3_over_n[k];
            prop_assert!((total - 1.0).abs() <= 1e-10, "sum rule broke: {total}");
            prop_assert!(traj.i1[k] >= 0.0 && traj.i2[k] >= 0.0);
            for p in [traj.p1_over_n[k], traj.p2_over_n[k], traj.p3_over_n[k]] {
                prop_assert!(p >= -1e-9 && p <= 1.0 + 1e-9, "population left [0,1]: {p}");
            }
            let i1_dressed = traj.d_mm[k] + traj.d_pp[k] - 2.0 * traj.re_cross[k];
            let i2_dressed = traj.d_mm[k] + traj.d_pp[k] + 2.0 * traj.re_cross[k];
            prop_assert!((traj.i1[k] - i1_dressed).abs() <= 1e-12 + 1e-12 * traj.i1[k].abs());
            prop_assert!((traj.i2[k] - i2_dressed).abs() <= 1e-12 + 1e-12 * traj.i2[k].abs());
        }
    }

    /// With equal rates, equal dipole weights, and no drive the two decay
    /// channels are interchangeable, so the populations of the two lower
    /// levels must track each other exactly.
    #[test]
    fn equal_branching_keeps_the_doublet_balanced(
        log_n in 2.0f64..7.0,
        gamma in 0.1f64..10.0,
        mu in 1e-4f64..1.0,
        log_seed in -6.0f64..-2.0,
    ) {
        let n = 10f64.powf(log_n).round() as u64;
        let params = SystemParams::inverted(n, gamma, gamma, mu, mu, 0.0);

        let traj = meanfield::simulate_with(
            &params,
            &quick_options(10.0, 10f64.powf(log_seed)),
        ).unwrap();

        for k in 0..traj.len() {
            prop_assert!(
                (traj.p1_over_n[k] - traj.p2_over_n[k]).abs() <= 1e-9,
                "doublet imbalance {} at sample {k}",
                traj.p1_over_n[k] - traj.p2_over_n[k]
            );
            prop_assert!((traj.i1[k] - traj.i2[k]).abs() <= 1e-9);
        }
    }
}
