//! Parameterized fixed-point iteration
//! `(I - alpha P) X_(k+1) = J + (1 - alpha) P X_k - P diag(X_k)`.
//!
//! `I - alpha P` is factorized once; each step is one product with `P` and
//! one pair of triangular solves. Convergence is declared when the largest
//! entrywise change drops below `tol`.
//!
//! Whether it converges depends on `alpha` and the chain: on some chains
//! large `alpha` makes the error grow, and the run stops with
//! [`Error::MaxIterExceeded`] once the change overflows or `max_iter` is hit.

use nalgebra::DMatrix;

use super::{require_regular, Algorithm, MfptMatrix};
use crate::chain::StochasticMatrix;
use crate::error::{Error, Result};
use crate::linsolve::lu_factorize;

/// Iterate, step counter and last entrywise change.
#[derive(Debug, Clone, PartialEq)]
pub struct XuState {
    pub x: DMatrix<f64>,
    pub k: usize,
    pub delta: f64,
}

/// Runs the iteration from `x0` (`J` when `None`).
pub fn solve_xu(
    p: &StochasticMatrix,
    alpha: f64,
    tol: f64,
    max_iter: usize,
    x0: Option<DMatrix<f64>>,
) -> Result<MfptMatrix> {
    solve_xu_with_state(p, alpha, tol, max_iter, x0, |_| {})
}

/// As [`solve_xu`], calling `observe` after every step.
pub fn solve_xu_with_state(
    p: &StochasticMatrix,
    alpha: f64,
    tol: f64,
    max_iter: usize,
    x0: Option<DMatrix<f64>>,
    mut observe: impl FnMut(&XuState),
) -> Result<MfptMatrix> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if !(tol > 0.0) {
        return Err(Error::ParamOutOfRange(format!("tolerance must be positive, got {tol}")));
    }
    require_regular(p)?;
    let n = p.n();
    let pm = p.matrix();
    let x0 = x0.unwrap_or_else(|| DMatrix::from_element(n, n, 1.0));
    if x0.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, found: x0.nrows() });
    }

    let mut system = pm * -alpha;
    for i in 0..n {
        system[(i, i)] += 1.0;
    }
    let lu = lu_factorize(&system)?;

    let mut state = XuState { x: x0, k: 0, delta: f64::INFINITY };
    let mut rhs = DMatrix::zeros(n, n);
    while state.k < max_iter {
        // Y = J + (1 - alpha) P X - P X_d, column j: (1 - alpha) P x_j - x_jj p_j + e
        pm.mul_to(&state.x, &mut rhs);
        rhs *= 1.0 - alpha;
        for j in 0..n {
            let xjj = state.x[(j, j)];
            let mut col = rhs.column_mut(j);
            col.axpy(-xjj, &pm.column(j), 1.0);
            col.add_scalar_mut(1.0);
        }
        let next = lu.solve(&rhs)?;
        let delta = (&next - &state.x).amax();
        state = XuState { x: next, k: state.k + 1, delta };
        observe(&state);
        if delta < tol {
            return Ok(MfptMatrix {
                values: state.x,
                solver: Algorithm::Xu,
                iterations: state.k,
                alpha: Some(alpha),
                warnings: Vec::new(),
            });
        }
        if !delta.is_finite() {
            break;
        }
    }
    Err(Error::MaxIterExceeded { iterations: state.k, delta: state.delta })
}
