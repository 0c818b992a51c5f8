//! Mean-first-passage-time solvers.
//!
//! Every solver returns an [`MfptMatrix`]: `m_ij` is the expected number of
//! steps to reach `j` from `i` for the first time, with `m_ii` the mean
//! recurrence time.

mod column;
mod fundamental;
mod monte_carlo;
mod xu;

pub use column::{build_column_system, solve_ls, solve_ls_with, ColumnSystem};
pub use fundamental::solve_fundamental;
pub use monte_carlo::{estimate_mc, CensoredCell, McEstimate};
pub use xu::{solve_xu, solve_xu_with_state, XuState};

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::chain::{diagnose, StochasticMatrix};
use crate::error::{Error, Result};
use crate::linsolve::MinNormMethod;

/// Which solver produced an [`MfptMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Column-wise minimal-norm least squares.
    Ls,
    /// Parameterized fixed-point iteration.
    Xu,
    /// Fundamental-matrix formula.
    Fundamental,
    /// Monte Carlo estimate.
    Mc,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Ls, Algorithm::Xu, Algorithm::Fundamental, Algorithm::Mc];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Ls => "ls",
            Algorithm::Xu => "xu",
            Algorithm::Fundamental => "fundamental",
            Algorithm::Mc => "mc",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::ParamOutOfRange(format!("unknown algorithm {s:?}")))
    }
}

/// Non-fatal conditions noticed while solving.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverWarning {
    /// QR pivot decay ratio of column `column`'s system exceeded `1e12`.
    IllConditioned { column: usize, pivot_ratio: f64 },
    /// Monte Carlo cells with at least one trajectory cut off at the horizon.
    Censored { cells: usize },
}

impl fmt::Display for SolverWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverWarning::IllConditioned { column, pivot_ratio } => {
                write!(f, "ill-conditioned column {column} (pivot ratio {pivot_ratio:.3e})")
            }
            SolverWarning::Censored { cells } => write!(f, "{cells} censored cells"),
        }
    }
}

/// A computed MFPT matrix and how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct MfptMatrix {
    pub values: DMatrix<f64>,
    pub solver: Algorithm,
    /// Zero for direct methods; trials for Monte Carlo.
    pub iterations: usize,
    pub alpha: Option<f64>,
    pub warnings: Vec<SolverWarning>,
}

impl MfptMatrix {
    pub(crate) fn direct(values: DMatrix<f64>, solver: Algorithm) -> Self {
        MfptMatrix { values, solver, iterations: 0, alpha: None, warnings: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }
}

/// How the column solves of [`solve_ls`] are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    /// rayon's global pool.
    #[default]
    Auto,
    /// A dedicated pool of this many threads.
    Threads(usize),
}

impl Parallelism {
    /// Reads `MFPT_THREADS`: unset selects `Auto`, `0` is sequential.
    pub fn from_env() -> Self {
        match std::env::var("MFPT_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            None => Parallelism::Auto,
            Some(0) => Parallelism::Sequential,
            Some(k) => Parallelism::Threads(k),
        }
    }
}

/// Solver selection and knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Absolute rank threshold for the minimal-norm solves; `None` uses `n * eps * ||A||_inf`.
    pub rank_tol: Option<f64>,
    pub min_norm: MinNormMethod,
    pub seed: u64,
    pub trials: usize,
    /// Monte Carlo step cap per trajectory; `None` uses `1000 * n`.
    pub horizon: Option<usize>,
    pub parallelism: Parallelism,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            algorithm: Algorithm::Ls,
            alpha: 0.5,
            tol: 1e-10,
            max_iter: 100_000,
            rank_tol: None,
            min_norm: MinNormMethod::CompleteOrthogonal,
            seed: 0,
            trials: 10_000,
            horizon: None,
            parallelism: Parallelism::Auto,
        }
    }
}

impl SolverConfig {
    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        SolverConfig { algorithm, ..Default::default() }
    }
}

/// Runs the configured solver.
pub fn solve(p: &StochasticMatrix, config: &SolverConfig) -> Result<MfptMatrix> {
    match config.algorithm {
        Algorithm::Ls => solve_ls_with(p, config.rank_tol, config.min_norm, config.parallelism),
        Algorithm::Xu => solve_xu(p, config.alpha, config.tol, config.max_iter, None),
        Algorithm::Fundamental => solve_fundamental(p),
        Algorithm::Mc => {
            let horizon = config.horizon.unwrap_or(1000 * p.n());
            estimate_mc(p, config.trials, config.seed, horizon).map(McEstimate::into_mfpt)
        }
    }
}

pub(crate) fn require_regular(p: &StochasticMatrix) -> Result<()> {
    let d = diagnose(p);
    if d.is_regular() {
        Ok(())
    } else {
        Err(Error::NotErgodic { irreducible: d.irreducible, period: d.period })
    }
}
