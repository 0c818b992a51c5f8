//! Minimal-norm least squares, `x = A⁺ b`.
//!
//! The default route is a column-pivoted Householder QR, `A Π = Q R`, which
//! reveals the numerical rank `r`. When `r < n` the leading `r` rows of `R`
//! are further reduced from the right, `[R11 R12] = [T 0] Z`, giving a
//! complete orthogonal decomposition `A = Q [T 0; 0 0] Z Πᵀ`. The minimal
//! norm solution is then `x = Π Zᵀ [T⁻¹ (Qᵀ b)₁; 0]`.

use log::debug;
use nalgebra::{DMatrix, DVector};

use super::{axpy_neg, default_rank_tol, dot};
use crate::error::{Error, Result};

/// Pivot decay ratio `|r_00| / |r_kk|` above which a solve is flagged as ill-conditioned.
pub const CONDITION_WARNING_RATIO: f64 = 1e12;

/// Which factorization backs [`min_norm_solve_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MinNormMethod {
    /// Column-pivoted QR plus complete orthogonal decomposition.
    #[default]
    CompleteOrthogonal,
    /// One-sided Jacobi SVD with singular values at or below the rank
    /// tolerance dropped. Slower; kept for debugging the default route.
    Svd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinNormSolution {
    pub x: DVector<f64>,
    /// Numerical rank of `A` under the tolerance used.
    pub rank: usize,
    /// `||A x - b||_2`
    pub residual_norm: f64,
    /// `|r_00| / |r_(rank-1)(rank-1)|` for the QR route, `s_0 / s_(rank-1)` for SVD.
    pub pivot_ratio: f64,
}

impl MinNormSolution {
    pub fn ill_conditioned(&self) -> bool {
        self.pivot_ratio > CONDITION_WARNING_RATIO
    }
}

/// Computes the minimal-norm least-squares solution of `A x = b` by complete
/// orthogonal decomposition.
///
/// `rank_tol` is an absolute threshold on the diagonal of `R`; `None` selects
/// `n * eps * ||A||_inf`. Returns [`Error::IncompatibleSystem`] when the
/// residual exceeds `1e-6 * max(1, ||b||_2)`; every system this crate builds is
/// compatible, so that error points at a bug upstream.
pub fn min_norm_solve(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    rank_tol: Option<f64>,
) -> Result<MinNormSolution> {
    min_norm_solve_with(MinNormMethod::CompleteOrthogonal, a, b, rank_tol)
}

pub fn min_norm_solve_with(
    method: MinNormMethod,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    rank_tol: Option<f64>,
) -> Result<MinNormSolution> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::NotSquare { rows: n, cols: a.ncols() });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let tol = rank_tol.unwrap_or_else(|| default_rank_tol(a));

    let (x, rank, pivot_ratio) = match method {
        MinNormMethod::CompleteOrthogonal => cod_solve(a.clone(), b, tol),
        MinNormMethod::Svd => svd_solve(a, b, tol)?,
    };

    let residual_norm = (a * &x - b).norm();
    if !(residual_norm <= 1e-6 * b.norm().max(1.0)) {
        return Err(Error::IncompatibleSystem { residual_norm });
    }
    if pivot_ratio > CONDITION_WARNING_RATIO {
        debug!("min-norm solve: pivot decay ratio {pivot_ratio:e} at rank {rank}/{n}");
    }
    Ok(MinNormSolution { x, rank, residual_norm, pivot_ratio })
}

/// Builds the reflector that maps `x` onto `beta * e_0`, `H = I - tau v vᵀ`,
/// `v[0] = 1`. On return `x[1..]` holds `v[1..]`; returns `(tau, beta)`.
fn householder(x: &mut [f64]) -> (f64, f64) {
    let alpha = x[0];
    let tail_sq = dot(&x[1..], &x[1..]);
    if tail_sq == 0.0 {
        return (0.0, alpha);
    }
    let norm = (alpha * alpha + tail_sq).sqrt();
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let scale = 1.0 / (alpha - beta);
    for v in &mut x[1..] {
        *v *= scale;
    }
    ((beta - alpha) / beta, beta)
}

fn cod_solve(mut qr: DMatrix<f64>, b: &DVector<f64>, tol: f64) -> (DVector<f64>, usize, f64) {
    let n = qr.nrows();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = b.clone();

    // Column norms with downdating; `vn_ref` holds the norm at the last
    // recomputation so cancellation can be detected.
    let mut vn: Vec<f64> = qr.column_iter().map(|col| col.norm()).collect();
    let mut vn_ref = vn.clone();
    let downdate_floor = f64::EPSILON.sqrt();

    for k in 0..n {
        let p = (k..n).fold(k, |best, j| if vn[j] > vn[best] { j } else { best });
        if p != k {
            qr.swap_columns(k, p);
            perm.swap(k, p);
            vn.swap(k, p);
            vn_ref.swap(k, p);
        }

        let data = qr.as_mut_slice();
        let (left, right) = data.split_at_mut((k + 1) * n);
        let (tau, beta) = householder(&mut left[k * n + k..]);
        left[k * n + k] = beta;
        let v_tail = &left[k * n + k + 1..];

        if tau != 0.0 {
            for col in right.chunks_exact_mut(n) {
                let seg = &mut col[k..];
                let s = seg[0] + dot(v_tail, &seg[1..]);
                let ts = tau * s;
                seg[0] -= ts;
                axpy_neg(ts, v_tail, &mut seg[1..]);
            }
            let cs = &mut c.as_mut_slice()[k..];
            let s = cs[0] + dot(v_tail, &cs[1..]);
            let ts = tau * s;
            cs[0] -= ts;
            axpy_neg(ts, v_tail, &mut cs[1..]);
        }

        for (off, col) in right.chunks_exact(n).enumerate() {
            let j = k + 1 + off;
            if vn[j] == 0.0 {
                continue;
            }
            let ratio = col[k].abs() / vn[j];
            let t = (1.0 - ratio * ratio).max(0.0);
            let t2 = t * (vn[j] / vn_ref[j]).powi(2);
            if t2 <= downdate_floor {
                let fresh = dot(&col[k + 1..], &col[k + 1..]).sqrt();
                vn[j] = fresh;
                vn_ref[j] = fresh;
            } else {
                vn[j] *= t.sqrt();
            }
        }
    }

    let diag = |k: usize| qr[(k, k)].abs();
    let rank = (0..n).take_while(|&k| diag(k) > tol).count();
    let pivot_ratio = if rank == 0 { f64::INFINITY } else { diag(0) / diag(rank - 1) };

    let mut z = DVector::zeros(n);
    if rank > 0 {
        // Upper trapezoid [R11 R12], reduced to [T 0] from the right.
        let mut t = qr.view((0, 0), (rank, n)).upper_triangle();
        let reflectors = if rank < n { reduce_trapezoid(&mut t) } else { Vec::new() };

        let zs = z.as_mut_slice();
        for k in (0..rank).rev() {
            let mut s = c[k];
            for j in k + 1..rank {
                s -= t[(k, j)] * zs[j];
            }
            zs[k] = s / t[(k, k)];
        }
        for (k, (tau, v)) in reflectors.iter().enumerate() {
            let (head, tail) = zs.split_at_mut(rank);
            let s = head[k] + dot(v, tail);
            let ts = tau * s;
            head[k] -= ts;
            axpy_neg(ts, v, tail);
        }
    }

    let mut x = DVector::zeros(n);
    for (k, &col) in perm.iter().enumerate() {
        x[col] = z[k];
    }
    (x, rank, pivot_ratio)
}

/// Annihilates the trailing block of an `r x n` upper trapezoid with
/// reflectors applied from the right, last row first. Returns the reflectors
/// indexed by row as `(tau, v[r..n])`; each acts on coordinates `{k} ∪ r..n`.
fn reduce_trapezoid(t: &mut DMatrix<f64>) -> Vec<(f64, Vec<f64>)> {
    let (r, n) = t.shape();
    let mut reflectors = vec![(0.0, Vec::new()); r];
    for k in (0..r).rev() {
        let mut x = Vec::with_capacity(1 + n - r);
        x.push(t[(k, k)]);
        x.extend((r..n).map(|j| t[(k, j)]));
        let (tau, beta) = householder(&mut x);
        let v = x[1..].to_vec();
        t[(k, k)] = beta;
        for j in r..n {
            t[(k, j)] = 0.0;
        }
        if tau != 0.0 {
            for i in 0..k {
                let s = t[(i, k)] + (r..n).zip(&v).map(|(j, vj)| t[(i, j)] * vj).sum::<f64>();
                let ts = tau * s;
                t[(i, k)] -= ts;
                for (j, vj) in (r..n).zip(&v) {
                    t[(i, j)] -= ts * vj;
                }
            }
        }
        reflectors[k] = (tau, v);
    }
    reflectors
}

fn svd_solve(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> Result<(DVector<f64>, usize, f64)> {
    let (u, sigma, v) = jacobi_svd(a.clone());
    let n = sigma.len();
    let kept: Vec<usize> = (0..n).filter(|&j| sigma[j] > tol).collect();
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let smin = kept.iter().map(|&j| sigma[j]).fold(f64::INFINITY, f64::min);
    let pivot_ratio = if kept.is_empty() { f64::INFINITY } else { smax / smin };
    let mut x = DVector::zeros(n);
    for &j in &kept {
        // columns of `u` carry the singular value: u_j = sigma_j * uhat_j
        let coef = u.column(j).dot(b) / (sigma[j] * sigma[j]);
        x.axpy(coef, &v.column(j), 1.0);
    }
    Ok((x, kept.len(), pivot_ratio))
}

/// One-sided (Hestenes) Jacobi SVD. Returns `(A V, sigma, V)`; the columns of
/// `A V` are mutually orthogonal with norms `sigma`.
fn jacobi_svd(mut u: DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    const MAX_SWEEPS: usize = 80;
    let n = u.ncols();
    let mut v = DMatrix::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = u.column(p).norm_squared();
                let beta = u.column(q).norm_squared();
                let gamma = u.column(p).dot(&u.column(q));
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut u, &mut v] {
                    for r in 0..m.nrows() {
                        let (xp, xq) = (m[(r, p)], m[(r, q)]);
                        m[(r, p)] = c * xp - s * xq;
                        m[(r, q)] = s * xp + c * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = u.column_iter().map(|c| c.norm()).collect();
    (u, sigma, v)
}
