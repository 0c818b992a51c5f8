//! Mean first passage times of finite regular Markov chains.
//!
//! The main solver splits the matrix equation `(I - P) M = J - P M_d` into
//! `n` independent column systems `(I - P_j) m_j = e` and takes the
//! minimal-norm least-squares solution of each. Alongside it sit a
//! parameterized fixed-point iteration, the fundamental-matrix formula, a
//! Monte Carlo estimator, residual metrics and test-matrix generators.
//!
//! ```
//! use mfpt_core::{generators, metrics, solvers};
//!
//! let p = generators::two_state(0.25, 0.5).unwrap();
//! let m = solvers::solve_ls(&p, None).unwrap();
//! assert!((m.get(0, 1) - 4.0).abs() < 1e-12);
//! let eps = metrics::residual_matrix(&p, &m.values).unwrap();
//! assert!(metrics::ore(&eps) < 1e-12);
//! ```

pub mod chain;
pub mod error;
pub mod generators;
pub mod linsolve;
pub mod metrics;
pub mod solvers;

pub use chain::{
    diagnose, stationary_distribution, validate_stochastic, ChainDiagnosis, StationaryDistribution,
    StochasticMatrix,
};
pub use error::{Error, Result};
pub use generators::GeneratorSpec;
pub use metrics::ResidualReport;
pub use solvers::{solve, Algorithm, MfptMatrix, Parallelism, SolverConfig, SolverWarning};

pub use nalgebra::{DMatrix, DVector};
