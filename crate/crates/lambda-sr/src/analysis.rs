//! Analytic-limit checkers, intensity estimates, and pulse metrics.
//!
//! Everything here is a pure function of a trajectory or of raw rates,
//! used both by the CLI `analyze` command and by validation tests.

use crate::error::{Error, Result};
use crate::peaks::{find_peaks, longest_plateau, plateaus, Peak, Plateau, PlateauConfig,
                   DEFAULT_PROMINENCE_FRACTION};
use crate::trajectory::Trajectory;

/// Excited-level population of one undriven atom that started with
/// ⟨S₃₃⟩ = `s33_0`: both decay channels empty the level at total rate
/// 2(γ₁ + γ₂).
pub fn single_atom_decay(t: f64, gamma1: f64, gamma2: f64, s33_0: f64) -> f64 {
    s33_0 * (-2.0 * (gamma1 + gamma2) * t).exp()
}

/// Residual of the two-channel cascade relation (1 + p1) = (1 + p2)^ratio
/// that an initially inverted ensemble obeys when both channels decay
/// collectively, with ratio = γ₁/γ₂.
///
/// Evaluated in log space: with populations up to N and ratios up to 1e8
/// the right-hand side overflows long before the relation itself breaks.
/// An overflowing difference saturates to ±∞ rather than erroring, since
/// a huge residual is an answer, not a failure.
pub fn dicke_relation_residual(p1: f64, p2: f64, ratio: f64) -> Result<f64> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::InvalidParams(format!(
            "decay-rate ratio must be positive and finite, got {ratio}"
        )));
    }
    if !(p1.is_finite() && p2.is_finite() && p1 > -1.0 && p2 > -1.0) {
        return Err(Error::InvalidParams(format!(
            "populations must be finite and above -1, got p1 = {p1}, p2 = {p2}"
        )));
    }
    let l1 = p1.ln_1p();
    let l2 = ratio * p2.ln_1p();
    let delta = l1 - l2;
    if delta == 0.0 {
        return Ok(0.0);
    }
    // e^l1 − e^l2 = sign(Δ) · exp(max + ln(1 − e^{−|Δ|})).
    let magnitude = (l1.max(l2) + (-(-delta.abs()).exp_m1()).ln()).exp();
    Ok(delta.signum() * magnitude)
}

/// Peak intensity on the weak channel if the N atoms emitted
/// independently: γ₂N multiplied by the branching weight
/// (γ₂/γ₁)/(1 + γ₂/γ₁).
pub fn independent_intensity_estimate(gamma1: f64, gamma2: f64, n: f64) -> f64 {
    let r = gamma2 / gamma1;
    gamma2 * n * (r / (1.0 + r))
}

/// Order-of-magnitude estimate of the collective weak-channel burst peak,
/// γ₂μ₂N²: the coherence built on the strong channel is handed to the
/// weak one, which then radiates with the full N² pair enhancement.
pub fn collective_intensity_estimate(gamma2: f64, mu2: f64, n: f64) -> f64 {
    gamma2 * mu2 * n * n
}

/// One trajectory sample, pulled out at a feature of interest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub time: f64,
    pub p1_over_n: f64,
    pub p2_over_n: f64,
    pub p3_over_n: f64,
    pub i1: f64,
    pub i2: f64,
}

/// Knobs for [`pulse_metrics_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseConfig {
    /// Minimum peak prominence as a fraction of the series maximum.
    pub prominence_fraction: f64,
    /// Flatness threshold and minimum duration for the p3 plateau scan.
    pub plateau: PlateauConfig,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            prominence_fraction: DEFAULT_PROMINENCE_FRACTION,
            plateau: PlateauConfig::default(),
        }
    }
}

/// Everything the acceptance checks and the sweep summary read off a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseMetrics {
    pub i1_peaks: Vec<Peak>,
    pub i2_peaks: Vec<Peak>,
    /// Tallest peak per channel, when any peak exists.
    pub i1_main: Option<Peak>,
    pub i2_main: Option<Peak>,
    /// Populations and intensities sampled at the main I2 peak.
    pub at_i2_peak: Option<SampleRecord>,
    /// Flat stretches of p3 over the whole run.
    pub p3_plateaus: Vec<Plateau>,
    pub longest_p3_plateau: Option<Plateau>,
    /// Flat stretch of p3 inside the burst window (0, 2·t_peak(I2)),
    /// where a plateau lasting a fixed fraction of the whole run would be
    /// an unreasonable ask for a burst lasting a tiny fraction of it.
    pub burst_plateau: Option<Plateau>,
    /// Trapezoidal ∫I dt per channel, in the trajectory's time unit.
    pub i1_energy: f64,
    pub i2_energy: f64,
}

pub fn pulse_metrics(traj: &Trajectory) -> Result<PulseMetrics> {
    pulse_metrics_with(traj, &PulseConfig::default())
}

pub fn pulse_metrics_with(traj: &Trajectory, config: &PulseConfig) -> Result<PulseMetrics> {
    if traj.is_empty() {
        return Err(Error::InvalidState("trajectory has no samples".into()));
    }
    let times = &traj.times;
    let i1_peaks = find_peaks(times, &traj.i1, config.prominence_fraction);
    let i2_peaks = find_peaks(times, &traj.i2, config.prominence_fraction);
    let tallest = |peaks: &[Peak]| {
        peaks
            .iter()
            .max_by(|a, b| a.value.total_cmp(&b.value))
            .copied()
    };
    let i1_main = tallest(&i1_peaks);
    let i2_main = tallest(&i2_peaks);

    let at_i2_peak = i2_main.map(|pk| SampleRecord {
        time: pk.time,
        p1_over_n: traj.p1_over_n[pk.index],
        p2_over_n: traj.p2_over_n[pk.index],
        p3_over_n: traj.p3_over_n[pk.index],
        i1: traj.i1[pk.index],
        i2: traj.i2[pk.index],
    });

    let p3_plateaus = plateaus(times, &traj.p3_over_n, &config.plateau, None);
    let longest_p3_plateau = longest_plateau(times, &traj.p3_over_n, &config.plateau, None);
    let burst_plateau = i2_main.and_then(|pk| {
        let window = (0.0, 2.0 * pk.time);
        longest_plateau(times, &traj.p3_over_n, &config.plateau, Some(window))
    });

    Ok(PulseMetrics {
        i1_peaks,
        i2_peaks,
        i1_main,
        i2_main,
        at_i2_peak,
        p3_plateaus,
        longest_p3_plateau,
        burst_plateau,
        i1_energy: trapezoid(times, &traj.i1),
        i2_energy: trapezoid(times, &traj.i2),
    })
}

/// Trapezoidal quadrature on a shared nonuniform grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Strong-channel intensity against the population-inversion slope for a
/// two-level reduction, both rescaled to unit peak.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeDiagnostic {
    pub times: Vec<f64>,
    /// I1 / max I1.
    pub intensity_rescaled: Vec<f64>,
    /// −d(p3 − p1)/dt / 2, rescaled by its own maximum.
    pub slope_rescaled: Vec<f64>,
    pub max_deviation: f64,
    pub correlation: f64,
}

/// Compares I1(t) with the inversion slope −d(p3 − p1)/dt / 2.
///
/// For a pure two-level superradiant decay the two series track each
/// other up to the single-atom spontaneous term, so their unit-peak
/// shapes nearly coincide. The comparison only means something in that
/// reduction, so runs with an active weak channel or drive are refused:
/// there the burst is fed by cross-channel coherence and the inversion
/// slope does not determine the intensity.
pub fn inversion_slope_diagnostic(traj: &Trajectory) -> Result<SlopeDiagnostic> {
    let p = &traj.meta.params;
    if p.gamma2 != 0.0 || p.rabi != 0.0 {
        return Err(Error::Regime(format!(
            "inversion-slope diagnostic needs a two-level reduction \
             (gamma2 = 0 and rabi = 0), got gamma2 = {}, rabi = {}",
            p.gamma2, p.rabi
        )));
    }
    if traj.len() < 3 {
        return Err(Error::InvalidState(
            "need at least 3 samples to differentiate".into(),
        ));
    }
    let n = traj.len();
    let inversion: Vec<f64> = (0..n)
        .map(|k| traj.p3_over_n[k] - traj.p1_over_n[k])
        .collect();
    let mut slope = vec![0.0; n];
    for k in 0..n {
        let (lo, hi) = if k == 0 {
            (0, 1)
        } else if k == n - 1 {
            (n - 2, n - 1)
        } else {
            (k - 1, k + 1)
        };
        slope[k] = -0.5 * (inversion[hi] - inversion[lo]) / (traj.times[hi] - traj.times[lo]);
    }

    let unit_peak = |series: &[f64]| -> (Vec<f64>, f64) {
        let peak = series.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            (series.to_vec(), 0.0)
        } else {
            (series.iter().map(|v| v / peak).collect(), peak)
        }
    };
    let (intensity_rescaled, _) = unit_peak(&traj.i1);
    let (slope_rescaled, _) = unit_peak(&slope);

    let max_deviation = intensity_rescaled
        .iter()
        .zip(&slope_rescaled)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    let correlation = pearson(&intensity_rescaled, &slope_rescaled);

    Ok(SlopeDiagnostic {
        times: traj.times.clone(),
        intensity_rescaled,
        slope_rescaled,
        max_deviation,
        correlation,
    })
}

/// Pearson correlation; two constant series correlate trivially and
/// report 1, one constant against one varying reports 0.
fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let mean = |s: &[f64]| s.iter().sum::<f64>() / n;
    let (ma, mb) = (mean(a), mean(b));
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    if va == 0.0 && vb == 0.0 {
        1.0
    } else if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}
