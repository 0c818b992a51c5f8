use nalgebra::DMatrix;

use super::{axpy_neg, norm_inf};
use crate::error::{Error, Result};

/// Relative pivot threshold below which a factorization is declared singular.
const PIVOT_RTOL: f64 = 1e-14;

/// Partial-pivoted LU factors, `perm * A = L * U`.
///
/// `L` (unit diagonal, not stored) and `U` share one packed matrix.
/// `perm[i]` is the row of `A` that ends up in row `i`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    packed: DMatrix<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Unit lower-triangular factor.
    pub fn l(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.packed[(i, j)],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        })
    }

    /// Upper-triangular factor.
    pub fn u(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| if i <= j { self.packed[(i, j)] } else { 0.0 })
    }

    /// The row permutation as a matrix `Pm` with `Pm * A = L * U`.
    pub fn perm_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, &src) in self.perm.iter().enumerate() {
            m[(i, src)] = 1.0;
        }
        m
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if b.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.nrows() });
        }
        let lu = self.packed.as_slice();
        let mut x = DMatrix::zeros(n, b.ncols());
        for (c, mut out) in x.column_iter_mut().enumerate() {
            let y = out.as_mut_slice();
            for (i, &src) in self.perm.iter().enumerate() {
                y[i] = b[(src, c)];
            }
            // L y = Pb
            for k in 0..n {
                let yk = y[k];
                if yk != 0.0 {
                    let col = &lu[k * n + k + 1..(k + 1) * n];
                    axpy_neg(yk, col, &mut y[k + 1..]);
                }
            }
            // U x = y
            for k in (0..n).rev() {
                y[k] /= lu[k * n + k];
                let xk = y[k];
                if xk != 0.0 {
                    let col = &lu[k * n..k * n + k];
                    axpy_neg(xk, col, &mut y[..k]);
                }
            }
        }
        Ok(x)
    }
}

/// Factorizes a square matrix with partial (row) pivoting.
///
/// Fails with [`Error::SingularPivot`] when the largest available pivot in a
/// column is below `1e-14 * ||A||_inf`.
pub fn lu_factorize(a: &DMatrix<f64>) -> Result<LuFactors> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::NotSquare { rows: n, cols: a.ncols() });
    }
    let threshold = PIVOT_RTOL * norm_inf(a);
    let mut packed = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let (p, pivot_abs) = {
            let col = &packed.as_slice()[k * n..(k + 1) * n];
            (k..n)
                .map(|i| (i, col[i].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
        };
        if !(pivot_abs > threshold) {
            return Err(Error::SingularPivot { pivot: k });
        }
        if p != k {
            packed.swap_rows(k, p);
            perm.swap(k, p);
        }

        let data = packed.as_mut_slice();
        let (left, right) = data.split_at_mut((k + 1) * n);
        let pivcol = &mut left[k * n..];
        let pivot = pivcol[k];
        for v in &mut pivcol[k + 1..] {
            *v /= pivot;
        }
        let mult = &pivcol[k + 1..];
        for col in right.chunks_exact_mut(n) {
            let akj = col[k];
            if akj != 0.0 {
                axpy_neg(akj, mult, &mut col[k + 1..]);
            }
        }
    }
    Ok(LuFactors { packed, perm })
}

/// Solves `A X = B` given the factors of `A`.
pub fn lu_solve(factors: &LuFactors, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    factors.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p1_like() -> DMatrix<f64> {
        DMatrix::from_row_slice(
            3,
            3,
            &[0.2, 0.5, 0.3, 0.6, 0.1, 0.3, 0.25, 0.25, 0.5],
        )
    }

    #[test]
    fn identity_factors_trivially() {
        let f = lu_factorize(&DMatrix::identity(4, 4)).unwrap();
        assert_eq!(f.l(), DMatrix::identity(4, 4));
        assert_eq!(f.u(), DMatrix::identity(4, 4));
        assert_eq!(f.perm(), &[0, 1, 2, 3]);
        let b = DMatrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64 - 2.5);
        assert_eq!(f.solve(&b).unwrap(), b);
    }

    #[test]
    fn diagonal_solve() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let f = lu_factorize(&a).unwrap();
        let x = f.solve(&DMatrix::from_column_slice(2, 1, &[2.0, 4.0])).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn reconstruction_is_tight() {
        let a = DMatrix::identity(3, 3) - p1_like() * 0.5;
        let f = lu_factorize(&a).unwrap();
        let diff = f.perm_matrix() * &a - f.l() * f.u();
        assert!(diff.amax() <= 1e-12 * norm_inf(&a));
    }

    #[test]
    fn rank_one_is_singular() {
        let a = DMatrix::from_fn(3, 3, |i, j| ((i + 1) * (j + 1)) as f64);
        assert!(matches!(lu_factorize(&a), Err(Error::SingularPivot { .. })));
    }

    #[test]
    fn pivots_on_zero_leading_entry() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let f = lu_factorize(&a).unwrap();
        assert_eq!(f.perm(), &[1, 0]);
        let x = f.solve(&DMatrix::from_column_slice(2, 1, &[3.0, 5.0])).unwrap();
        assert_eq!(x.as_slice(), &[5.0, 3.0]);
    }

    #[test]
    fn matches_nalgebra_solve() {
        let a = DMatrix::identity(3, 3) * 2.0 - p1_like();
        let b = DMatrix::from_fn(3, 2, |i, j| 1.0 + i as f64 - j as f64);
        let ours = lu_factorize(&a).unwrap().solve(&b).unwrap();
        let theirs = a.clone().lu().solve(&b).unwrap();
        assert_relative_eq!(ours, theirs, epsilon = 1e-13);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            lu_factorize(&DMatrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
        let f = lu_factorize(&DMatrix::identity(2, 2)).unwrap();
        assert!(f.solve(&DMatrix::zeros(3, 1)).is_err());
    }
}
