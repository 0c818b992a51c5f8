//! Validated row-stochastic matrices and their structural diagnosis.

use std::collections::VecDeque;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linsolve::lu_factorize;

/// Default absolute tolerance on `|sum_j p_ij - 1|`.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A square row-stochastic transition matrix with at least two states.
///
/// Immutable once built; entries are exactly the validated input.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    p: DMatrix<f64>,
}

impl StochasticMatrix {
    /// Validates with the default row-sum tolerance.
    pub fn new(raw: DMatrix<f64>) -> Result<Self> {
        validate_stochastic(raw, ROW_SUM_TOL)
    }

    /// Divides each row by its own sum before validating. Used for matrices
    /// published with truncated decimals.
    pub fn renormalized(mut raw: DMatrix<f64>) -> Result<Self> {
        check_shape(&raw)?;
        for (i, mut row) in raw.row_iter_mut().enumerate() {
            let sum: f64 = row.iter().sum();
            if !(sum > 0.0) || !sum.is_finite() {
                return Err(Error::DegenerateRow { row: i, sum });
            }
            row /= sum;
        }
        Self::new(raw)
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, |r| r.len());
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::NotSquare { rows: n, cols: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, cols, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    /// `max_i |sum_j p_ij - 1|`
    pub fn max_row_sum_deviation(&self) -> f64 {
        row_sum_deviations(&self.p).into_iter().fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        self.p == self.p.transpose()
    }

    /// Successors of each state in the support digraph (`i -> j` iff `p_ij > 0`).
    pub fn support(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).filter(|&j| self.p[(i, j)] > 0.0).collect())
            .collect()
    }
}

fn check_shape(raw: &DMatrix<f64>) -> Result<()> {
    let (rows, cols) = raw.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows < 2 {
        return Err(Error::TooFewStates(rows));
    }
    Ok(())
}

fn row_sum_deviations(p: &DMatrix<f64>) -> Vec<f64> {
    p.row_iter().map(|r| (r.sum() - 1.0).abs()).collect()
}

/// Checks entries lie in `[0, 1]` and rows sum to 1 within `tol`.
pub fn validate_stochastic(raw: DMatrix<f64>, tol: f64) -> Result<StochasticMatrix> {
    check_shape(&raw)?;
    for i in 0..raw.nrows() {
        let mut sum = 0.0;
        for j in 0..raw.ncols() {
            let value = raw[(i, j)];
            if !value.is_finite() {
                return Err(Error::NonFiniteEntry { row: i, col: j });
            }
            if value < 0.0 {
                return Err(Error::NegativeEntry { row: i, col: j, value });
            }
            if value > 1.0 {
                return Err(Error::EntryAboveOne { row: i, col: j, value });
            }
            sum += value;
        }
        if (sum - 1.0).abs() > tol {
            return Err(Error::RowSumViolation { row: i, sum });
        }
    }
    Ok(StochasticMatrix { p: raw })
}

/// Structural classification of the support digraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainDiagnosis {
    pub irreducible: bool,
    pub aperiodic: bool,
    /// 1 when aperiodic. Only meaningful for irreducible chains; reducible
    /// chains report the period of the class reachable from state 0.
    pub period: usize,
}

impl ChainDiagnosis {
    /// Irreducible and aperiodic.
    pub fn is_regular(&self) -> bool {
        self.irreducible && self.aperiodic
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let next = level[u].map(|l| l + 1);
        for &v in &adj[u] {
            if level[v].is_none() {
                level[v] = next;
                queue.push_back(v);
            }
        }
    }
    level
}

/// Strong connectivity of the support digraph plus the period via BFS
/// level differences from state 0.
pub fn diagnose(p: &StochasticMatrix) -> ChainDiagnosis {
    let adj = p.support();
    let n = adj.len();
    let mut rev = vec![Vec::new(); n];
    for (u, succ) in adj.iter().enumerate() {
        for &v in succ {
            rev[v].push(u);
        }
    }
    let fwd = bfs_levels(&adj, 0);
    let bwd = bfs_levels(&rev, 0);
    let irreducible = fwd.iter().all(Option::is_some) && bwd.iter().all(Option::is_some);

    // gcd over edges inside the reachable set of (level[u] + 1 - level[v])
    let mut period = 0;
    for (u, succ) in adj.iter().enumerate() {
        let Some(lu) = fwd[u] else { continue };
        for &v in succ {
            if let Some(lv) = fwd[v] {
                period = gcd(period, (lu + 1).abs_diff(lv));
            }
        }
    }
    // no cycle reachable from 0 at all (cannot happen for stochastic P)
    let period = period.max(1);
    ChainDiagnosis { irreducible, aperiodic: period == 1, period }
}

/// Probability row vector `pi` with `pi P = pi` and entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pi: DVector<f64>,
}

impl StationaryDistribution {
    pub fn as_vector(&self) -> &DVector<f64> {
        &self.pi
    }

    pub fn get(&self, i: usize) -> f64 {
        self.pi[i]
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    /// `||pi P - pi||_inf`
    pub fn residual(&self, p: &StochasticMatrix) -> f64 {
        (p.matrix().tr_mul(&self.pi) - &self.pi).amax()
    }
}

/// Solves `(I - Pᵀ) pi = 0` with the last equation replaced by `sum(pi) = 1`.
///
/// A numerically reducible chain makes the replaced system singular.
pub fn stationary_distribution(p: &StochasticMatrix) -> Result<StationaryDistribution> {
    let n = p.n();
    let mut a = -p.matrix().transpose();
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    a.row_mut(n - 1).fill(1.0);
    let mut rhs = DMatrix::zeros(n, 1);
    rhs[(n - 1, 0)] = 1.0;

    let lu = lu_factorize(&a).map_err(|_| Error::SingularSystem)?;
    let x = lu.solve(&rhs)?;
    let mut pi = DVector::from_column_slice(x.as_slice());
    // clean the rounding-level negatives a near-zero component can pick up
    if pi.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    pi.iter_mut().for_each(|v| *v = v.max(0.0));
    let total = pi.sum();
    if !(total > 0.0) {
        return Err(Error::SingularSystem);
    }
    pi /= total;
    Ok(StationaryDistribution { pi })
}

/// Parses the dense text format: a line holding `n`, then `n` rows of `n`
/// whitespace-separated numbers. Blank lines and `#` comments are skipped.
pub fn parse_dense_txt(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines
        .next()
        .ok_or(Error::Parse { line: 1, message: "missing dimension header".into() })?;
    let n: usize = header.parse().map_err(|_| Error::Parse {
        line: header_line,
        message: format!("expected a state count, found {header:?}"),
    })?;

    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0;
    let mut last_line = header_line;
    for (line, content) in lines {
        last_line = line;
        if rows == n {
            return Err(Error::Parse { line, message: format!("more than {n} rows") });
        }
        let before = data.len();
        for tok in content.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid number {tok:?}"),
            })?;
            data.push(v);
        }
        let got = data.len() - before;
        if got != n {
            return Err(Error::Parse { line, message: format!("expected {n} entries, found {got}") });
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse { line: last_line, message: format!("expected {n} rows, found {rows}") });
    }
    Ok(DMatrix::from_row_slice(n, n, &data))
}

/// Inverse of [`parse_dense_txt`]; numbers use the shortest round-trip form.
pub fn format_dense_txt(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", m.nrows());
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}
