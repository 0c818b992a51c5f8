//! Residual-based quality indices for a computed MFPT matrix.
//!
//! `eps_ij = m_ij - sum_(k != j) p_ik m_kj - 1`, which is entry `(i, j)` of
//! `(I - P) M - J + P M_d`. ORE sums `|eps_ij|`; PZE is the fraction of
//! residuals that are exactly zero.

use std::time::Instant;

use nalgebra::DMatrix;

use crate::chain::StochasticMatrix;
use crate::error::{Error, Result};
use crate::solvers::MfptMatrix;

/// Threshold for the near-zero fraction reported next to PZE.
pub const NEAR_ZERO_THRESHOLD: f64 = 1e-12;

/// Residual matrix of `m` against the first-passage equations of `p`.
pub fn residual_matrix(p: &StochasticMatrix, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = p.n();
    if m.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
    }
    let pm = p.matrix();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let mut s = 0.0;
        for k in 0..n {
            if k != j {
                s += pm[(i, k)] * m[(k, j)];
            }
        }
        m[(i, j)] - s - 1.0
    }))
}

/// Fraction of entries that are exactly `0.0`.
pub fn pze(epsilon: &DMatrix<f64>) -> f64 {
    fraction(epsilon, |v| v == 0.0)
}

/// Fraction of entries with `|eps| <= 1e-12`.
pub fn near_zero_fraction(epsilon: &DMatrix<f64>) -> f64 {
    fraction(epsilon, |v| v.abs() <= NEAR_ZERO_THRESHOLD)
}

fn fraction(epsilon: &DMatrix<f64>, pred: impl Fn(f64) -> bool) -> f64 {
    if epsilon.is_empty() {
        return 0.0;
    }
    epsilon.iter().filter(|&&v| pred(v)).count() as f64 / epsilon.len() as f64
}

/// Sum of absolute residuals, accumulated in row-major order.
pub fn ore(epsilon: &DMatrix<f64>) -> f64 {
    let mut total = 0.0;
    for row in epsilon.row_iter() {
        for v in row.iter() {
            total += v.abs();
        }
    }
    total
}

/// Runs `f` and returns its result with the elapsed wall time in seconds.
pub fn timed<R>(f: impl FnOnce() -> R) -> (R, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub epsilon: DMatrix<f64>,
    pub pze: f64,
    pub near_zero_frac: f64,
    pub ore: f64,
    pub wall_time_s: f64,
    pub solver_tag: String,
    pub n: usize,
}

impl ResidualReport {
    pub fn new(p: &StochasticMatrix, m: &MfptMatrix, wall_time_s: f64) -> Result<Self> {
        let epsilon = residual_matrix(p, &m.values)?;
        Ok(ResidualReport {
            pze: pze(&epsilon),
            near_zero_frac: near_zero_fraction(&epsilon),
            ore: ore(&epsilon),
            epsilon,
            wall_time_s,
            solver_tag: m.solver.tag().to_string(),
            n: p.n(),
        })
    }
}
