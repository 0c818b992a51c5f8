//! CSV rows for solve and bench runs.

use std::io::Write;

use mfpt_core::metrics::ResidualReport;
use mfpt_core::{Algorithm, MfptMatrix};

pub const CSV_HEADER: [&str; 11] = [
    "n",
    "matrix",
    "algorithm",
    "alpha",
    "repeats",
    "mean_time_s",
    "pze",
    "near_zero_frac",
    "ore",
    "iterations",
    "warning",
];

pub const FAILED: &str = "failed";

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Solved { pze: f64, near_zero_frac: f64, ore: f64, iterations: usize },
    Failed,
}

/// One (matrix, algorithm) result.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub matrix: String,
    pub algorithm: Algorithm,
    pub alpha: Option<f64>,
    pub repeats: usize,
    pub mean_time_s: f64,
    pub outcome: Outcome,
    pub warning: String,
}

impl BenchRow {
    pub fn solved(matrix: String, report: &ResidualReport, m: &MfptMatrix, repeats: usize) -> Self {
        let warning = m.warnings.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
        BenchRow {
            n: report.n,
            matrix,
            algorithm: m.solver,
            alpha: m.alpha,
            repeats,
            mean_time_s: report.wall_time_s,
            outcome: Outcome::Solved {
                pze: report.pze,
                near_zero_frac: report.near_zero_frac,
                ore: report.ore,
                iterations: m.iterations,
            },
            warning,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.outcome == Outcome::Failed
    }

    pub fn ore(&self) -> Option<f64> {
        match self.outcome {
            Outcome::Solved { ore, .. } => Some(ore),
            Outcome::Failed => None,
        }
    }

    pub fn record(&self) -> Vec<String> {
        let (pze, nz, ore, it) = match &self.outcome {
            Outcome::Solved { pze, near_zero_frac, ore, iterations } => {
                (pze.to_string(), near_zero_frac.to_string(), format!("{ore:e}"), iterations.to_string())
            }
            Outcome::Failed => (FAILED.into(), FAILED.into(), FAILED.into(), FAILED.into()),
        };
        vec![
            self.n.to_string(),
            self.matrix.clone(),
            self.algorithm.tag().to_string(),
            self.alpha.map(|a| a.to_string()).unwrap_or_default(),
            self.repeats.to_string(),
            format!("{:e}", self.mean_time_s),
            pze,
            nz,
            ore,
            it,
            self.warning.clone(),
        ]
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[BenchRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}
