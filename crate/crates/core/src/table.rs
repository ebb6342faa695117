//! Tab-separated tables: one header row of column names, then one row per
//! sample. Floats use the shortest representation that round-trips.

use std::fmt::Write;

use crate::dynamics::TrajectorySample;
use crate::eigen::EigenTriple;
use crate::emission::EmissionProbabilities;
use crate::error::{Error, Result};
use crate::spectrum::SpectrumGrid;
use crate::Complex64;

pub const TRAJECTORY_COLUMNS: [&str; 11] = [
    "t", "re_e", "im_e", "re_g", "im_g", "re_f", "im_f", "occ_e", "occ_g", "occ_f", "norm",
];
pub const EIGEN_COLUMNS: [&str; 7] = [
    "delta_omega",
    "re_lambda1",
    "im_lambda1",
    "re_lambda2",
    "im_lambda2",
    "re_lambda3",
    "im_lambda3",
];
pub const EMISSION_COLUMNS: [&str; 5] = ["delta_omega", "p1", "p2", "p3", "sum"];
pub const SPECTRUM_COLUMNS: [&str; 4] = ["omega", "s_a", "s_b", "s_total"];

/// A rectangular table of floats with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for row in &self.rows {
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push('\t');
                }
                write!(out, "{v:e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses the output of [`Table::to_tsv`], skipping `#` comment lines.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidGrid("table has no header row".into()))?;
        let columns: Vec<String> = header.split('\t').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let row = line
                .split('\t')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidGrid(format!("row {}: {e}", n + 1)))?;
            if row.len() != columns.len() {
                return Err(Error::InvalidGrid(format!(
                    "row {} has {} fields, expected {}",
                    n + 1,
                    row.len(),
                    columns.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }
}

fn parts(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

pub fn trajectory_table(samples: &[TrajectorySample]) -> Table {
    let mut table = Table::new(&TRAJECTORY_COLUMNS);
    for s in samples {
        let mut row = vec![s.t];
        for amp in [s.amp_e, s.amp_g, s.amp_f] {
            row.extend(parts(amp));
        }
        row.extend([s.occ_e, s.occ_g, s.occ_f, s.norm]);
        table.push(row);
    }
    table
}

/// Eigenvalues in branch order.
pub fn eigen_table(grid: &[f64], sweep: &[EigenTriple]) -> Table {
    let mut table = Table::new(&EIGEN_COLUMNS);
    for (&dw, triple) in grid.iter().zip(sweep) {
        let mut row = vec![dw];
        for l in triple.by_branch() {
            row.extend(parts(l));
        }
        table.push(row);
    }
    table
}

/// Failed sweep points appear as rows of NaN.
pub fn emission_table(grid: &[f64], sweep: &[Result<EmissionProbabilities>]) -> Table {
    let mut table = Table::new(&EMISSION_COLUMNS);
    for (&dw, point) in grid.iter().zip(sweep) {
        table.push(match point {
            Ok(e) => vec![dw, e.p1, e.p2, e.p3, e.total()],
            Err(_) => vec![dw, f64::NAN, f64::NAN, f64::NAN, f64::NAN],
        });
    }
    table
}

pub fn spectrum_table(spectrum: &SpectrumGrid) -> Table {
    let mut table = Table::new(&SPECTRUM_COLUMNS);
    for k in 0..spectrum.omega_axis.len() {
        table.push(vec![
            spectrum.omega_axis[k],
            spectrum.s_a[k],
            spectrum.s_b[k],
            spectrum.s_total[k],
        ]);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_round_trip_is_exact() {
        let mut t = Table::new(&["x", "y"]);
        t.push(vec![0.1, -1.0 / 3.0]);
        t.push(vec![1e-300, f64::NAN]);
        let text = t.to_tsv();
        assert!(text.starts_with("x\ty\n"));
        let back = Table::from_tsv(&format!("# comment\n{text}")).unwrap();
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.rows[0], t.rows[0]);
        assert_eq!(back.rows[1][0], 1e-300);
        assert!(back.rows[1][1].is_nan());
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(Table::from_tsv("a\tb\n1\n").is_err());
        assert!(Table::from_tsv("# only comments\n").is_err());
    }
}
