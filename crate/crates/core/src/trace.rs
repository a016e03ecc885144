//! Per-index records of partial sums and running maxima, with CSV output.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::operators::VectorField;

pub const CSV_COLUMNS: [&str; 5] = ["n", "norm_Sn_over_Wn", "series_partial_norm", "running_max_Lp", "sup_circle"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: u64,
    pub norm_sn_over_wn: Option<f64>,
    pub series_partial_norm: Option<f64>,
    pub running_max_lp: Option<f64>,
    pub sup_circle: Option<f64>,
}

impl TraceRow {
    pub fn new(n: u64) -> Self {
        Self { n, norm_sn_over_wn: None, series_partial_norm: None, running_max_lp: None, sup_circle: None }
    }
}

/// Rows in strictly increasing `n`, plus the pointwise running maximum of
/// the traced quantity (the discrete maximal function).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformTrace {
    pub p: f64,
    pub rows: Vec<TraceRow>,
    running_max: Vec<f64>,
}

impl TransformTrace {
    pub fn new(p: f64) -> Self {
        Self { p, rows: Vec::new(), running_max: Vec::new() }
    }

    pub fn running_max(&self) -> &[f64] {
        &self.running_max
    }

    /// `((1/N) Σ_x max_{m ≤ n} |Q_m(x)|^p)^{1/p}` for the current state.
    pub fn running_max_lp(&self) -> f64 {
        let n = self.running_max.len();
        if n == 0 {
            return 0.0;
        }
        let s: f64 = self.running_max.iter().map(|&x| if self.p == 2.0 { x * x } else { math::powf(x, self.p) }).sum();
        math::powf(s / n as f64, 1.0 / self.p)
    }

    /// Folds `q` into the pointwise running maximum.
    pub fn update_max(&mut self, q: &VectorField) {
        let norms = q.pointwise_norms();
        if self.running_max.is_empty() {
            self.running_max = norms;
        } else {
            for (m, v) in self.running_max.iter_mut().zip(norms) {
                if v > *m {
                    *m = v;
                }
            }
        }
    }

    /// Appends a row. `average` is `S_n/W_n`, `series` the partial series;
    /// the running max tracks the average when present, else the series.
    pub fn record(&mut self, n: u64, average: Option<&VectorField>, series: Option<&VectorField>, sup: Option<f64>) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if n <= last.n {
                return Err(Error::Precondition(alloc::format!("trace index {n} does not exceed {}", last.n)));
            }
        }
        let mut row = TraceRow::new(n);
        row.norm_sn_over_wn = average.map(|a| a.norm_p(self.p));
        row.series_partial_norm = series.map(|s| s.norm_p(self.p));
        if let Some(q) = average.or(series) {
            self.update_max(q);
            row.running_max_lp = Some(self.running_max_lp());
        }
        row.sup_circle = sup;
        self.rows.push(row);
        Ok(())
    }

    pub fn push_row(&mut self, row: TraceRow) -> Result<()> {
        if self.rows.last().is_some_and(|last| row.n <= last.n) {
            return Err(Error::Precondition(alloc::format!("trace index {} is not increasing", row.n)));
        }
        self.rows.push(row);
        Ok(())
    }

    fn present(&self) -> [bool; 5] {
        let any = |f: fn(&TraceRow) -> Option<f64>| self.rows.iter().any(|r| f(r).is_some());
        [
            true,
            any(|r| r.norm_sn_over_wn),
            any(|r| r.series_partial_norm),
            any(|r| r.running_max_lp),
            any(|r| r.sup_circle),
        ]
    }

    /// CSV with the columns that carry at least one value.
    pub fn to_csv(&self) -> String {
        let present = self.present();
        let mut out = String::new();
        let header: Vec<&str> = CSV_COLUMNS.iter().zip(present).filter(|(_, p)| *p).map(|(c, _)| *c).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{}", r.n);
            for (v, p) in [r.norm_sn_over_wn, r.series_partial_norm, r.running_max_lp, r.sup_circle].into_iter().zip(&present[1..]) {
                if *p {
                    out.push(',');
                    if let Some(v) = v {
                        let _ = write!(out, "{v:e}");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::SampleSpace;
    use num_complex::Complex64;

    #[test]
    fn csv_has_only_present_columns() {
        let mut t = TransformTrace::new(2.0);
        let f = VectorField::from_fn(SampleSpace::Finite { m: 2 }, 1, |i, o| o[0] = Complex64::new(i as f64, 0.0));
        t.record(1, None, Some(&f), None).unwrap();
        t.record(3, None, Some(&f.scaled(Complex64::new(0.5, 0.0))), None).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,series_partial_norm,running_max_Lp"));
        assert_eq!(lines.count(), 2);
        assert!(t.record(3, None, Some(&f), None).is_err());
        assert_eq!(t.running_max(), &[0.0, 1.0]);
    }
}
