//! Sampled simulation output: normalized populations, doublet coherence,
//! channel intensities, and the dressed-basis decomposition, on a strictly
//! increasing time grid with an explicit unit tag.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{SolverStats, Tolerances};
use crate::params::{ScaledParams, SystemParams};

/// Unit of the time axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    /// Multiples of 1/(μ₁γ₁N), the collective fast-channel time.
    FastScaled,
    /// Multiples of 1/(μ₂γ₂N), the collective weak-channel time.
    SlowScaled,
    /// Raw time in whatever unit 1/γ₁ was expressed in.
    Physical,
}

impl TimeUnit {
    pub fn label(&self) -> &'static str {
        match self {
            TimeUnit::FastScaled => "fast_scaled",
            TimeUnit::SlowScaled => "slow_scaled",
            TimeUnit::Physical => "physical",
        }
    }
}

/// Provenance carried with every trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub params: SystemParams,
    pub scaled: ScaledParams,
    /// Seed policy label, e.g. "fluctuation(1e-4)".
    pub seed_policy: String,
    pub tolerances: Tolerances,
    /// Integration method label.
    pub method: String,
    pub stats: Option<SolverStats>,
    /// Engine crate version that produced the data.
    pub engine_version: String,
}

/// Time series of every recorded observable.
///
/// Populations and the doublet coherence are normalized per atom;
/// intensities are pair densities `q_ss/N²`, so the dimensional channel-s
/// emission rate is `μ_s γ_s N² · I_s`. The dressed columns decompose the
/// same emission into the laser-dressed basis: `i1 = d_mm + d_pp −
/// 2·Re(cross)` and `i2 = d_mm + d_pp + 2·Re(cross)` hold pointwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub time_unit: TimeUnit,
    pub times: Vec<f64>,
    pub p1_over_n: Vec<f64>,
    pub p2_over_n: Vec<f64>,
    pub p3_over_n: Vec<f64>,
    pub re_c12_over_n: Vec<f64>,
    pub im_c12_over_n: Vec<f64>,
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
    pub d_mm: Vec<f64>,
    pub d_pp: Vec<f64>,
    pub re_cross: Vec<f64>,
    pub im_cross: Vec<f64>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// All value columns in CSV order, paired with their header names
    /// (time columns excluded).
    pub fn columns(&self) -> [(&'static str, &[f64]); 11] {
        [
            ("p1_over_N", &self.p1_over_n),
            ("p2_over_N", &self.p2_over_n),
            ("p3_over_N", &self.p3_over_n),
            ("re_c12_over_N", &self.re_c12_over_n),
            ("im_c12_over_N", &self.im_c12_over_n),
            ("I1", &self.i1),
            ("I2", &self.i2),
            ("d_mm", &self.d_mm),
            ("d_pp", &self.d_pp),
            ("re_cross", &self.re_cross),
            ("im_cross", &self.im_cross),
        ]
    }

    /// Times converted to the requested unit.
    ///
    /// Fast and slow scaled times are related by t_slow_units =
    /// t_fast_units · (t_fast/t_slow) = t_fast_units · r_gamma · r_mu.
    /// Conversion into slow units fails when γ₂ = 0 (no slow time scale).
    pub fn times_in(&self, unit: TimeUnit) -> Result<Vec<f64>> {
        let factor = conversion_factor(&self.meta.scaled, self.time_unit, unit)?;
        Ok(self.times.iter().map(|t| t * factor).collect())
    }

    /// Structural checks: consistent lengths, strictly increasing times.
    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::InvalidState("trajectory has no samples".into()));
        }
        let n = self.times.len();
        for (name, col) in self.columns() {
            if col.len() != n {
                return Err(Error::InvalidState(format!(
                    "column {name} has {} samples, expected {n}",
                    col.len()
                )));
            }
        }
        for w in self.times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidState(
                    "trajectory times must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }
}

fn unit_in_physical_time(scaled: &ScaledParams, unit: TimeUnit) -> f64 {
    match unit {
        TimeUnit::FastScaled => scaled.t_fast,
        TimeUnit::SlowScaled => scaled.t_slow,
        TimeUnit::Physical => 1.0,
    }
}

/// Multiplier converting times expressed in `from` into `to`.
pub fn conversion_factor(scaled: &ScaledParams, from: TimeUnit, to: TimeUnit) -> Result<f64> {
    let from_scale = unit_in_physical_time(scaled, from);
    let to_scale = unit_in_physical_time(scaled, to);
    if !from_scale.is_finite() || !to_scale.is_finite() {
        return Err(Error::InvalidParams(format!(
            "cannot convert {} times to {}: the slow time unit is infinite (gamma2 = 0)",
            from.label(),
            to.label()
        )));
    }
    Ok(from_scale / to_scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::nondimensionalize;
    use approx::assert_relative_eq;

    fn meta() -> TrajectoryMeta {
        let params = SystemParams::inverted(1000, 1.0, 0.01, 0.5, 0.25, 0.0);
        let scaled = nondimensionalize(&params);
        TrajectoryMeta {
            params,
            scaled,
            seed_policy: "none".into(),
            tolerances: Tolerances::default(),
            method: "rk45".into(),
            stats: None,
            engine_version: "test".into(),
        }
    }

    fn tiny(meta: TrajectoryMeta) -> Trajectory {
        Trajectory {
            time_unit: TimeUnit::FastScaled,
            times: vec![0.0, 1.0, 2.0],
            p1_over_n: vec![0.0; 3],
            p2_over_n: vec![0.0; 3],
            p3_over_n: vec![1.0; 3],
            re_c12_over_n: vec![0.0; 3],
            im_c12_over_n: vec![0.0; 3],
            i1: vec![0.0; 3],
            i2: vec![0.0; 3],
            d_mm: vec![0.0; 3],
            d_pp: vec![0.0; 3],
            re_cross: vec![0.0; 3],
            im_cross: vec![0.0; 3],
            meta,
        }
    }

    #[test]
    fn fast_to_slow_conversion_uses_rate_ratio() {
        let t = tiny(meta());
        let slow = t.times_in(TimeUnit::SlowScaled).unwrap();
        // r_gamma = 0.01, r_mu = 0.5 so one fast unit is 0.005 slow units.
        assert_relative_eq!(slow[1], 0.005, max_relative = 1e-12);
        let physical = t.times_in(TimeUnit::Physical).unwrap();
        assert_relative_eq!(physical[2], 2.0 * t.meta.scaled.t_fast, max_relative = 1e-12);
    }

    #[test]
    fn slow_conversion_fails_without_weak_channel() {
        let mut m = meta();
        m.params.gamma2 = 0.0;
        m.scaled = nondimensionalize(&m.params);
        let t = tiny(m);
        assert!(t.times_in(TimeUnit::SlowScaled).is_err());
        assert!(t.times_in(TimeUnit::FastScaled).is_ok());
    }

    #[test]
    fn validation_checks_lengths_and_monotonicity() {
        let mut t = tiny(meta());
        t.validate().unwrap();
        t.i2.pop();
        assert!(t.validate().is_err());
        t.i2.push(0.0);
        t.times[2] = 0.5;
        assert!(t.validate().is_err());
    }
}
