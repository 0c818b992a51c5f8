//! Dense factorization kernels.
//!
//! Two factorizations are provided: a partial-pivoted LU used by the
//! parameterized iteration and the fundamental-matrix baseline, and a
//! column-pivoted QR followed by a complete orthogonal decomposition that
//! applies the Moore-Penrose inverse to a vector without forming it.
//!
//! All kernels work on column-major [`DMatrix`] storage and touch the
//! underlying slices directly so the inner loops stay contiguous.

mod lu;
mod min_norm;

pub use lu::{lu_factorize, lu_solve, LuFactors};
pub use min_norm::{
    min_norm_solve, min_norm_solve_with, MinNormMethod, MinNormSolution, CONDITION_WARNING_RATIO,
};

use nalgebra::DMatrix;

/// Maximum absolute row sum.
pub fn norm_inf(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Rank tolerance used when the caller does not supply one: `n * eps * ||A||_inf`.
pub fn default_rank_tol(a: &DMatrix<f64>) -> f64 {
    a.nrows().max(a.ncols()) as f64 * f64::EPSILON * norm_inf(a)
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = [0.0f64; 4];
    let chunks = x.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += x[i] * y[i];
        acc[1] += x[i + 1] * y[i + 1];
        acc[2] += x[i + 2] * y[i + 2];
        acc[3] += x[i + 3] * y[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..x.len() {
        tail += x[i] * y[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y -= alpha * x`
#[inline]
pub(crate) fn axpy_neg(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= alpha * xi;
    }
}
