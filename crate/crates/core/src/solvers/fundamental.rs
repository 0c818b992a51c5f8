use nalgebra::DMatrix;

use super::{require_regular, Algorithm, MfptMatrix};
use crate::chain::{stationary_distribution, StochasticMatrix};
use crate::error::{Error, Result};
use crate::linsolve::lu_factorize;

/// Fundamental-matrix baseline.
///
/// `Z = (I - P + e piᵀ)⁻¹` by one dense LU, then `m_ij = (z_jj - z_ij) / pi_j`
/// off the diagonal and `m_ii = 1 / pi_i`.
pub fn solve_fundamental(p: &StochasticMatrix) -> Result<MfptMatrix> {
    require_regular(p)?;
    let n = p.n();
    let pi = stationary_distribution(p)?;
    let pi = pi.as_vector();

    let mut a = -p.matrix();
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    for j in 0..n {
        a.column_mut(j).add_scalar_mut(pi[j]);
    }
    let lu = lu_factorize(&a).map_err(|_| Error::SingularSystem)?;
    let z = lu.solve(&DMatrix::identity(n, n))?;

    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0 / pi[j]
        } else {
            (z[(j, j)] - z[(i, j)]) / pi[j]
        }
    });
    Ok(MfptMatrix::direct(m, Algorithm::Fundamental))
}
