//! Minimal static SVG line charts for the two-panel figure layout
//! (populations panel and intensities panel). Deterministic text output,
//! no external assets.

use std::fs;
use std::path::Path;

use crate::error::CliResult;

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub values: &'a [f64],
}

pub const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() || s == "-" {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{v:.1e}")
    }
}

/// Evenly spaced "nice" ticks covering [lo, hi].
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let range = hi - lo;
    if !(range > 0.0) || !range.is_finite() {
        return vec![lo];
    }
    let raw = range / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    } * mag;
    let first = (lo / step).ceil() * step;
    let mut out = Vec::new();
    let mut v = first;
    while v <= hi + 0.5 * step {
        out.push(v);
        v += step;
    }
    out
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders one chart with shared x values. With `log_x` the x axis is
/// log10-scaled and nonpositive x samples are dropped.
pub fn line_chart(
    path: &Path,
    title: &str,
    x_label: &str,
    x: &[f64],
    series: &[Series<'_>],
    log_x: bool,
) -> CliResult<()> {
    let xs: Vec<f64> = if log_x {
        x.iter().map(|&v| if v > 0.0 { v.log10() } else { f64::NAN }).collect()
    } else {
        x.to_vec()
    };

    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    for &v in xs.iter().filter(|v| v.is_finite()) {
        x_lo = x_lo.min(v);
        x_hi = x_hi.max(v);
    }
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for s in series {
        for (&v, &xv) in s.values.iter().zip(&xs) {
            if v.is_finite() && xv.is_finite() {
                y_lo = y_lo.min(v);
                y_hi = y_hi.max(v);
            }
        }
    }
    if !x_lo.is_finite() || !x_hi.is_finite() {
        x_lo = 0.0;
        x_hi = 1.0;
    }
    if !y_lo.is_finite() || !y_hi.is_finite() {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if x_hi - x_lo <= 0.0 {
        x_hi = x_lo + 1.0;
    }
    if y_hi - y_lo <= 0.0 {
        let pad = y_lo.abs().max(1e-12) * 0.1 + 1e-12;
        y_lo -= pad;
        y_hi += pad;
    } else {
        let pad = (y_hi - y_lo) * 0.05;
        y_lo -= pad;
        y_hi += pad;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |xv: f64, yv: f64| -> (f64, f64) {
        (
            MARGIN_LEFT + (xv - x_lo) / (x_hi - x_lo) * plot_w,
            MARGIN_TOP + (1.0 - (yv - y_lo) / (y_hi - y_lo)) * plot_h,
        )
    };

    let mut svg = String::with_capacity(16 * 1024);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"28\" font-family=\"monospace\" font-size=\"16\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));

    // Grid, ticks, and labels.
    for tx in ticks(x_lo, x_hi, 6) {
        let (px, _) = to_px(tx, y_lo);
        svg.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{MARGIN_TOP}\" x2=\"{px:.1}\" y2=\"{:.1}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            MARGIN_TOP + plot_h
        ));
        let label = if log_x {
            format!("1e{}", format_tick(tx))
        } else {
            format_tick(tx)
        };
        svg.push_str(&format!(
            "<text x=\"{px:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" \
             text-anchor=\"middle\">{}</text>\n",
            MARGIN_TOP + plot_h + 22.0,
            escape(&label)
        ));
    }
    for ty in ticks(y_lo, y_hi, 6) {
        let (_, py) = to_px(x_lo, ty);
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_LEFT}\" y1=\"{py:.1}\" x2=\"{:.1}\" y2=\"{py:.1}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            MARGIN_LEFT + plot_w
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" \
             text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 8.0,
            py + 4.0,
            escape(&format_tick(ty))
        ));
    }
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" \
         fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"14\" \
         text-anchor=\"middle\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    ));

    // Data polylines; breaks at nonfinite samples.
    for s in series {
        let mut points = String::new();
        let mut segments = Vec::new();
        for (&yv, &xv) in s.values.iter().zip(&xs) {
            if xv.is_finite() && yv.is_finite() {
                let (px, py) = to_px(xv, yv);
                points.push_str(&format!("{px:.2},{py:.2} "));
            } else if !points.is_empty() {
                segments.push(std::mem::take(&mut points));
            }
        }
        if !points.is_empty() {
            segments.push(points);
        }
        for seg in segments {
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                seg.trim_end(),
                s.color
            ));
        }
    }

    // Legend, top-right corner of the plot area.
    for (i, s) in series.iter().enumerate() {
        let ly = MARGIN_TOP + 16.0 + 18.0 * i as f64;
        let lx = MARGIN_LEFT + plot_w - 150.0;
        svg.push_str(&format!(
            "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
             stroke=\"{}\" stroke-width=\"2\"/>\n",
            lx + 26.0,
            s.color
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\">{}</text>\n",
            lx + 32.0,
            ly + 4.0,
            escape(s.label)
        ));
    }

    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(())
}
