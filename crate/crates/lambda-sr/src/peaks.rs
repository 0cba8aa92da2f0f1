//! Grid-level peak and plateau detection for pulse-shaped time series.

/// A local maximum of a sampled series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub time: f64,
    pub value: f64,
    /// Height of the peak above the higher of the two valley floors
    /// separating it from larger neighbors (or the series edge).
    pub prominence: f64,
    /// Sample index of the apex.
    pub index: usize,
}

/// Default prominence floor as a fraction of the global maximum.
pub const DEFAULT_PROMINENCE_FRACTION: f64 = 0.05;

/// Local maxima of `values` with prominence at least
/// `prominence_floor_fraction` times the global maximum, ordered by time.
///
/// A flat-topped maximum reports its first sample. Monotone series have no
/// interior maxima and return an empty list.
pub fn find_peaks(times: &[f64], values: &[f64], prominence_floor_fraction: f64) -> Vec<Peak> {
    assert_eq!(times.len(), values.len());
    let n = values.len();
    if n < 3 {
        return Vec::new();
    }
    let global_max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let floor = prominence_floor_fraction * global_max.abs();

    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            // Walk across a possible flat top.
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                if let Some(p) = prominence(values, i) {
                    if p >= floor {
                        peaks.push(Peak {
                            time: times[i],
                            value: values[i],
                            prominence: p,
                            index: i,
                        });
                    }
                }
                i = j + 1;
                continue;
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Prominence of the local maximum at `apex`: scan outward until a strictly
/// higher sample (or the edge), take the minimum on each side, and measure
/// the apex above the higher minimum.
fn prominence(values: &[f64], apex: usize) -> Option<f64> {
    let peak = values[apex];
    // A series edge plays the role of a higher neighbor: the base on that
    // side is the lowest point reached before the edge.
    let mut left_min = peak;
    for i in (0..apex).rev() {
        if values[i] > peak {
            break;
        }
        left_min = left_min.min(values[i]);
    }
    let mut right_min = peak;
    for &v in &values[apex + 1..] {
        if v > peak {
            break;
        }
        right_min = right_min.min(v);
    }
    Some(peak - left_min.max(right_min))
}

/// A maximal interval on which a series is flat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub t_start: f64,
    pub t_end: f64,
    pub index_start: usize,
    pub index_end: usize,
}

impl Plateau {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start && t <= self.t_end
    }
}

/// Plateau detector configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauConfig {
    /// A sample is flat when |slope| is below this fraction of the global
    /// maximum |slope|.
    pub threshold_fraction: f64,
    /// Minimum plateau duration as a fraction of the examined window.
    pub min_duration_fraction: f64,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        Self {
            threshold_fraction: 0.02,
            min_duration_fraction: 0.01,
        }
    }
}

/// Maximal flat intervals of `values`, using centered finite-difference
/// slopes and the thresholds in `config`, restricted to `window` when given.
///
/// The slope threshold is always relative to the global maximum slope of
/// the full series, so a window selects where to look without rescaling
/// what counts as flat. Returned intervals are ordered by time.
pub fn plateaus(
    times: &[f64],
    values: &[f64],
    config: &PlateauConfig,
    window: Option<(f64, f64)>,
) -> Vec<Plateau> {
    assert_eq!(times.len(), values.len());
    let n = values.len();
    if n < 3 {
        return Vec::new();
    }
    let mut slope = vec![0.0; n];
    slope[0] = (values[1] - values[0]) / (times[1] - times[0]);
    slope[n - 1] = (values[n - 1] - values[n - 2]) / (times[n - 1] - times[n - 2]);
    for i in 1..n - 1 {
        slope[i] = (values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1]);
    }
    let max_slope = slope.iter().map(|s| s.abs()).fold(0.0_f64, f64::max);
    if max_slope == 0.0 {
        // Constant series: one plateau spanning everything requested.
        let (lo, hi) = window.unwrap_or((times[0], times[n - 1]));
        return vec![Plateau {
            t_start: lo.max(times[0]),
            t_end: hi.min(times[n - 1]),
            index_start: 0,
            index_end: n - 1,
        }];
    }
    let threshold = config.threshold_fraction * max_slope;
    let (lo, hi) = window.unwrap_or((times[0], times[n - 1]));
    let min_duration = config.min_duration_fraction * (hi - lo);

    let in_window = |i: usize| times[i] >= lo && times[i] <= hi;
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if slope[i].abs() <= threshold && in_window(i) {
            let start = i;
            while i + 1 < n && slope[i + 1].abs() <= threshold && in_window(i + 1) {
                i += 1;
            }
            let p = Plateau {
                t_start: times[start],
                t_end: times[i],
                index_start: start,
                index_end: i,
            };
            if p.duration() >= min_duration && p.index_end > p.index_start {
                out.push(p);
            }
        }
        i += 1;
    }
    out
}

/// The longest plateau, if any.
pub fn longest_plateau(
    times: &[f64],
    values: &[f64],
    config: &PlateauConfig,
    window: Option<(f64, f64)>,
) -> Option<Plateau> {
    plateaus(times, values, config, window)
        .into_iter()
        .max_by(|a, b| a.duration().total_cmp(&b.duration()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn uniform(n: usize, t_end: f64) -> Vec<f64> {
        (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn monotone_series_has_no_peaks() {
        let t = uniform(100, 1.0);
        let v: Vec<f64> = t.iter().map(|x| x * x).collect();
        assert!(find_peaks(&t, &v, 0.05).is_empty());
    }

    #[test]
    fn triangular_pulse_has_one_peak_at_apex() {
        let t = uniform(101, 1.0);
        let v: Vec<f64> = t.iter().map(|x| 1.0 - (x - 0.4).abs() * 2.0).collect();
        let peaks = find_peaks(&t, &v, 0.05);
        assert_eq!(peaks.len(), 1);
        assert_relative_eq!(peaks[0].time, 0.4, epsilon = 0.011);
        assert_relative_eq!(peaks[0].value, 1.0, epsilon = 0.03);
    }

    #[test]
    fn small_ripples_are_filtered_by_prominence() {
        let t = uniform(2001, 20.0);
        let v: Vec<f64> = t
            .iter()
            .map(|&x| (-((x - 10.0) / 2.0) * ((x - 10.0) / 2.0)).exp() + 0.01 * (8.0 * x).sin())
            .collect();
        let peaks = find_peaks(&t, &v, 0.05);
        assert_eq!(peaks.len(), 1, "{peaks:?}");
        assert_relative_eq!(peaks[0].time, 10.0, epsilon = 0.25);
    }

    #[test]
    fn two_bursts_both_detected_in_time_order() {
        let t = uniform(4001, 30.0);
        let v: Vec<f64> = t
            .iter()
            .map(|&x| {
                0.8 * (-(x - 8.0) * (x - 8.0)).exp() + 1.0 * (-(x - 18.0) * (x - 18.0)).exp()
            })
            .collect();
        let peaks = find_peaks(&t, &v, 0.05);
        assert_eq!(peaks.len(), 2);
        assert!(peaks[0].time < peaks[1].time);
        assert!(peaks[1].prominence > peaks[0].prominence * 0.9);
    }

    #[test]
    fn plateau_detected_between_two_drops() {
        // Sigmoid drop, flat shelf, second drop.
        let t = uniform(2001, 30.0);
        let v: Vec<f64> = t
            .iter()
            .map(|&x| 1.0 / (1.0 + ((x - 8.0) * 2.0).exp()) * 0.5
                + 0.5 / (1.0 + ((x - 20.0) * 2.0).exp()))
            .collect();
        let found = plateaus(&t, &v, &PlateauConfig::default(), None);
        assert!(
            found.iter().any(|p| p.contains(14.0)),
            "no shelf plateau in {found:?}"
        );
    }

    #[test]
    fn constant_series_is_one_full_plateau() {
        let t = uniform(50, 5.0);
        let v = vec![0.7; 50];
        let found = plateaus(&t, &v, &PlateauConfig::default(), None);
        assert_eq!(found.len(), 1);
        assert_relative_eq!(found[0].duration(), 5.0);
    }

    #[test]
    fn window_restricts_detection_without_rescaling() {
        let t = uniform(2001, 30.0);
        let v: Vec<f64> = t
            .iter()
            .map(|&x| 1.0 / (1.0 + ((x - 8.0) * 2.0).exp()) * 0.5
                + 0.5 / (1.0 + ((x - 20.0) * 2.0).exp()))
            .collect();
        let cfg = PlateauConfig::default();
        let inside = plateaus(&t, &v, &cfg, Some((10.0, 18.0)));
        assert!(inside.iter().all(|p| p.t_start >= 10.0 && p.t_end <= 18.0));
        assert!(inside.iter().any(|p| p.contains(14.0)));
        let late = plateaus(&t, &v, &cfg, Some((0.0, 6.0)));
        assert!(late.iter().all(|p| !p.contains(14.0)));
    }

    #[test]
    fn longest_plateau_prefers_the_terminal_shelf() {
        let t = uniform(3001, 40.0);
        let v: Vec<f64> = t.iter().map(|&x| 1.0 / (1.0 + ((x - 5.0) * 3.0).exp())).collect();
        let p = longest_plateau(&t, &v, &PlateauConfig::default(), None).unwrap();
        assert!(p.t_end > 39.0);
        assert!(p.duration() > 25.0);
    }
}
