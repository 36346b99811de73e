//! Per-iteration records and their CSV form.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::extragradient::LipschitzConstants;
use crate::linalg::{self, Vector};
use crate::solver::Algorithm;

/// CSV header of a trace file.
pub const CSV_HEADER: [&str; 4] = ["n", "D_n", "step_residual", "descent_slack"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: usize,
    #[serde(with = "linalg::serde_vector")]
    pub x: Vector,
    /// `D_n = ‖x_n − x*‖` when the solution is known.
    pub distance: Option<f64>,
    pub selected_i: Option<usize>,
    pub selected_j: Option<usize>,
    /// `‖x_n − x_{n−1}‖`; absent for the initial point.
    pub step_residual: Option<f64>,
    /// Slack of the per-iteration descent inequality (nonnegative when it holds).
    pub descent_slack: Option<f64>,
    /// Wall-clock time of the iteration that produced this record.
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub algorithm: Algorithm,
    pub rho: f64,
    pub constants: LipschitzConstants,
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn final_distance(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.distance)
    }

    pub fn final_point(&self) -> Option<&Vector> {
        self.records.last().map(|r| &r.x)
    }

    /// Number of completed outer iterations.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn total_ms(&self) -> f64 {
        self.records.iter().map(|r| r.elapsed_ms).sum()
    }

    pub fn mean_iteration_ms(&self) -> f64 {
        let n = self.iterations();
        if n == 0 {
            0.0
        } else {
            self.total_ms() / n as f64
        }
    }

    /// First iteration index with `D_n < threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.distance.is_some_and(|d| d < threshold))
            .map(|r| r.n)
    }

    /// Writes the deterministic columns of the trace. Floats carry 17
    /// significant digits; missing values are empty fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.n.to_string(),
                fmt_opt(r.distance),
                fmt_opt(r.step_residual),
                fmt_opt(r.descent_slack),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}
