//! Trajectory CSV schema: fixed column order, fixed float formatting.
//!
//! Every float is written as `{:.16e}` (17 significant digits), which
//! round-trips f64 exactly and makes repeated runs byte-identical. Both
//! time axes are always present; with γ₂ = 0 the slow axis μ₂γ₂N·t is
//! identically zero.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use lambda_sr::trajectory::{TimeUnit, Trajectory};

use crate::error::{CliError, CliResult};

/// Column order contract; changing it breaks downstream readers.
pub const COLUMNS: [&str; 13] = [
    "t_scaled_slow",
    "t_scaled_fast",
    "p1_over_N",
    "p2_over_N",
    "p3_over_N",
    "re_c12_over_N",
    "im_c12_over_N",
    "I1",
    "I2",
    "d_mm",
    "d_pp",
    "re_cross",
    "im_cross",
];

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> CliResult<()> {
    let fast = traj.times_in(TimeUnit::FastScaled)?;
    // Slow = fast × (μ₂γ₂)/(μ₁γ₁); the product form stays finite (zero)
    // when the weak channel is switched off entirely.
    let slow_per_fast = traj.meta.scaled.r_gamma * traj.meta.scaled.r_mu;

    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", COLUMNS.join(","))?;
    for k in 0..traj.len() {
        let row = [
            fast[k] * slow_per_fast,
            fast[k],
            traj.p1_over_n[k],
            traj.p2_over_n[k],
            traj.p3_over_n[k],
            traj.re_c12_over_n[k],
            traj.im_c12_over_n[k],
            traj.i1[k],
            traj.i2[k],
            traj.d_mm[k],
            traj.d_pp[k],
            traj.re_cross[k],
            traj.im_cross[k],
        ];
        let mut line = String::with_capacity(16 * 26);
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:.16e}"));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// A parsed CSV with named float columns.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }
}

pub fn read_table(path: &Path) -> CliResult<CsvTable> {
    let file = File::open(path)
        .map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| CliError::Config(format!("{}: empty file", path.display())))??;
    let header: Vec<String> = header_line.split(',').map(|s| s.trim().to_string()).collect();
    let mut columns = vec![Vec::new(); header.len()];
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(CliError::Config(format!(
                "{}: line {} has {} fields, header has {}",
                path.display(),
                lineno + 2,
                fields.len(),
                header.len()
            )));
        }
        for (i, field) in fields.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "{}: line {}: bad float {field:?} in column {}",
                    path.display(),
                    lineno + 2,
                    self_or_index(&header, i)
                ))
            })?;
            columns[i].push(value);
        }
    }
    Ok(CsvTable { header, columns })
}

fn self_or_index(header: &[String], i: usize) -> String {
    header.get(i).cloned().unwrap_or_else(|| i.to_string())
}

/// Reads a trajectory CSV and checks it carries the exact schema.
pub fn read_trajectory_table(path: &Path) -> CliResult<CsvTable> {
    let table = read_table(path)?;
    if table.header != COLUMNS {
        return Err(CliError::Config(format!(
            "{}: unexpected columns {:?}, expected {:?}",
            path.display(),
            table.header,
            COLUMNS
        )));
    }
    Ok(table)
}
