//! Column-wise least-squares solver.
//!
//! Column `j` of the MFPT matrix satisfies `x_j = P x_j' + e`, where `x_j'`
//! is `x_j` with its `j`-th entry zeroed. Equivalently `A_j x_j = e` with
//! `A_j = I - P_j` and `P_j` the transition matrix with column `j` zeroed.
//! Each system is compatible, so its minimal-norm solution `A_j⁺ e` is the
//! column itself whether or not `A_j` is singular. The `n` systems are
//! independent and are solved in parallel when allowed.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{require_regular, Algorithm, MfptMatrix, Parallelism, SolverWarning};
use crate::chain::StochasticMatrix;
use crate::error::{Error, Result};
use crate::linsolve::{min_norm_solve_with, MinNormMethod, MinNormSolution};

/// The linear system `A_j x_j = e` for one target state `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSystem {
    pub state: usize,
    /// `I - P_j`; column `state` is the unit vector `e_state`.
    pub matrix: DMatrix<f64>,
}

pub fn build_column_system(p: &StochasticMatrix, state: usize) -> Result<ColumnSystem> {
    let n = p.n();
    if state >= n {
        return Err(Error::IndexOutOfRange { index: state, n });
    }
    let mut a = -p.matrix();
    for k in 0..n {
        a[(k, k)] += 1.0;
    }
    a.column_mut(state).fill(0.0);
    a[(state, state)] = 1.0;
    Ok(ColumnSystem { state, matrix: a })
}

fn solve_column(
    p: &StochasticMatrix,
    j: usize,
    rank_tol: Option<f64>,
    method: MinNormMethod,
) -> Result<MinNormSolution> {
    let system = build_column_system(p, j)?;
    let ones = DVector::from_element(p.n(), 1.0);
    min_norm_solve_with(method, &system.matrix, &ones, rank_tol)
}

/// Minimal-norm least-squares solve of every column system with the default
/// factorization and parallel schedule.
pub fn solve_ls(p: &StochasticMatrix, rank_tol: Option<f64>) -> Result<MfptMatrix> {
    solve_ls_with(p, rank_tol, MinNormMethod::CompleteOrthogonal, Parallelism::Auto)
}

/// Output is identical for every `parallelism` setting: each task owns one
/// column and the columns are assembled in index order.
pub fn solve_ls_with(
    p: &StochasticMatrix,
    rank_tol: Option<f64>,
    method: MinNormMethod,
    parallelism: Parallelism,
) -> Result<MfptMatrix> {
    require_regular(p)?;
    let n = p.n();
    let run = |j: usize| solve_column(p, j, rank_tol, method);

    let columns: Vec<Result<MinNormSolution>> = match parallelism {
        Parallelism::Sequential => (0..n).map(run).collect(),
        Parallelism::Auto => (0..n).into_par_iter().map(run).collect(),
        Parallelism::Threads(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| (0..n).into_par_iter().map(run).collect()),
            Err(err) => {
                log::warn!("could not build a {k}-thread pool ({err}); solving sequentially");
                (0..n).map(run).collect()
            }
        },
    };

    let mut values = DMatrix::zeros(n, n);
    let mut warnings = Vec::new();
    for (j, col) in columns.into_iter().enumerate() {
        let sol = col?;
        if sol.ill_conditioned() {
            warnings.push(SolverWarning::IllConditioned { column: j, pivot_ratio: sol.pivot_ratio });
        }
        values.set_column(j, &sol.x);
    }
    let mut m = MfptMatrix::direct(values, Algorithm::Ls);
    m.warnings = warnings;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{fixture, random_sparse, two_state, two_state_exact_mfpt};
    use approx::assert_relative_eq;

    #[test]
    fn column_system_two_state() {
        let p = two_state(0.5, 0.5).unwrap();
        let sys = build_column_system(&p, 0).unwrap();
        assert_eq!(sys.matrix, DMatrix::from_row_slice(2, 2, &[1.0, -0.5, 0.0, 0.5]));
    }

    #[test]
    fn column_system_unit_column_and_restore() {
        let p = fixture("P1").unwrap();
        let n = p.n();
        for j in 0..n {
            let sys = build_column_system(&p, j).unwrap();
            for k in 0..n {
                assert_eq!(sys.matrix[(k, j)], if k == j { 1.0 } else { 0.0 });
            }
            // A_j - P'_j = I - P, with P'_j holding only column j of P
            let mut restored = sys.matrix.clone();
            for k in 0..n {
                restored[(k, j)] -= p.get(k, j);
            }
            let i_minus_p = DMatrix::identity(n, n) - p.matrix();
            assert_eq!(restored, i_minus_p);
        }
        assert_eq!(
            build_column_system(&p, n).unwrap_err(),
            Error::IndexOutOfRange { index: n, n }
        );
    }

    #[test]
    fn two_state_closed_forms() {
        let m = solve_ls(&two_state(0.25, 0.5).unwrap(), None).unwrap();
        assert_relative_eq!(m.values, two_state_exact_mfpt(0.25, 0.5), max_relative = 1e-14);
        let m = solve_ls(&two_state(0.5, 0.5).unwrap(), None).unwrap();
        assert_relative_eq!(m.values, DMatrix::from_element(2, 2, 2.0), max_relative = 1e-14);
        assert_eq!(m.solver, Algorithm::Ls);
        assert_eq!(m.iterations, 0);
    }

    #[test]
    fn rejects_periodic_chain() {
        let err = solve_ls(&two_state(1.0, 1.0).unwrap(), None).unwrap_err();
        assert_eq!(err, Error::NotErgodic { irreducible: true, period: 2 });
    }

    #[test]
    fn parallel_schedule_is_bitwise_identical() {
        let p = random_sparse(40, 0.4, 5).unwrap();
        let seq = solve_ls_with(&p, None, MinNormMethod::CompleteOrthogonal, Parallelism::Sequential).unwrap();
        let auto = solve_ls_with(&p, None, MinNormMethod::CompleteOrthogonal, Parallelism::Auto).unwrap();
        let four = solve_ls_with(&p, None, MinNormMethod::CompleteOrthogonal, Parallelism::Threads(4)).unwrap();
        assert_eq!(seq.values, auto.values);
        assert_eq!(seq.values, four.values);
    }

    #[test]
    fn svd_route_agrees() {
        let p = fixture("P2").unwrap();
        let cod = solve_ls(&p, None).unwrap();
        let svd = solve_ls_with(&p, None, MinNormMethod::Svd, Parallelism::Sequential).unwrap();
        assert_relative_eq!(cod.values, svd.values, max_relative = 1e-10);
    }

    #[test]
    fn nearly_absorbing_state_warns() {
        let m = solve_ls(&two_state(1e-13, 0.5).unwrap(), None).unwrap();
        assert!(matches!(m.warnings[..], [SolverWarning::IllConditioned { column: 1, .. }]));
        assert!(solve_ls(&fixture("P1").unwrap(), None).unwrap().warnings.is_empty());
    }
}
