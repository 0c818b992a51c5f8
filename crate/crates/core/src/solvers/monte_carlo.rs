//! Simulation estimate of first passage times.
//!
//! Each trial from start state `i` runs one trajectory until every state has
//! been hit (or the horizon is reached) and records, for every target `j`,
//! the first step at which `j` was entered; for `j = i` that is the return
//! time. Row `i` draws from its own ChaCha8 stream `(seed, stream = i)`, so
//! rows can be simulated in parallel without changing the result.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Algorithm, MfptMatrix, SolverWarning};
use crate::chain::StochasticMatrix;
use crate::error::{Error, Result};

/// A target that was not reached within the horizon in `count` trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CensoredCell {
    pub i: usize,
    pub j: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    /// Sample mean over uncensored trials; NaN when every trial was censored.
    pub mean: DMatrix<f64>,
    /// Standard error of each mean.
    pub std_err: DMatrix<f64>,
    pub trials: usize,
    pub censored: Vec<CensoredCell>,
}

impl McEstimate {
    pub fn into_mfpt(self) -> MfptMatrix {
        let warnings = if self.censored.is_empty() {
            Vec::new()
        } else {
            vec![SolverWarning::Censored { cells: self.censored.len() }]
        };
        MfptMatrix {
            values: self.mean,
            solver: Algorithm::Mc,
            iterations: self.trials,
            alpha: None,
            warnings,
        }
    }

    pub fn is_censored(&self, i: usize, j: usize) -> bool {
        self.censored.iter().any(|c| c.i == i && c.j == j)
    }
}

struct RowStats {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    hits: Vec<usize>,
}

fn simulate_row(cumulative: &[Vec<f64>], start: usize, trials: usize, seed: u64, horizon: usize) -> RowStats {
    let n = cumulative.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start as u64);

    let mut stats = RowStats { sum: vec![0.0; n], sum_sq: vec![0.0; n], hits: vec![0; n] };
    // seen[j] == trial marks j as already hit in this trial (trials count from 1)
    let mut seen = vec![0usize; n];
    for trial in 1..=trials {
        let mut state = start;
        let mut remaining = n;
        let mut step = 0;
        while remaining > 0 && step < horizon {
            let u: f64 = rng.random();
            let row = &cumulative[state];
            state = row.partition_point(|&c| c <= u).min(n - 1);
            // rounding can leave the top of the cdf short of 1; never land on a zero-probability state
            while state > 0 && row[state] == row[state - 1] {
                state -= 1;
            }
            step += 1;
            if seen[state] != trial {
                seen[state] = trial;
                remaining -= 1;
                let t = step as f64;
                stats.sum[state] += t;
                stats.sum_sq[state] += t * t;
                stats.hits[state] += 1;
            }
        }
    }
    stats
}

/// Estimates the MFPT matrix from `trials` trajectories per start state.
pub fn estimate_mc(p: &StochasticMatrix, trials: usize, seed: u64, horizon: usize) -> Result<McEstimate> {
    let n = p.n();
    if trials == 0 {
        return Err(Error::ParamOutOfRange("Monte Carlo needs at least one trial".into()));
    }
    if horizon < n {
        return Err(Error::ParamOutOfRange(format!("horizon {horizon} is shorter than n = {n}")));
    }
    let cumulative: Vec<Vec<f64>> = p
        .matrix()
        .row_iter()
        .map(|row| {
            row.iter()
                .scan(0.0, |acc, &v| {
                    *acc += v;
                    Some(*acc)
                })
                .collect()
        })
        .collect();

    let rows: Vec<RowStats> = (0..n)
        .into_par_iter()
        .map(|i| simulate_row(&cumulative, i, trials, seed, horizon))
        .collect();

    let mut mean = DMatrix::from_element(n, n, f64::NAN);
    let mut std_err = DMatrix::from_element(n, n, f64::NAN);
    let mut censored = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        for j in 0..n {
            let hits = row.hits[j];
            if hits < trials {
                censored.push(CensoredCell { i, j, count: trials - hits });
            }
            if hits == 0 {
                continue;
            }
            let k = hits as f64;
            let mu = row.sum[j] / k;
            mean[(i, j)] = mu;
            std_err[(i, j)] = if hits > 1 {
                let var = ((row.sum_sq[j] - k * mu * mu) / (k - 1.0)).max(0.0);
                (var / k).sqrt()
            } else {
                0.0
            };
        }
    }
    Ok(McEstimate { mean, std_err, trials, censored })
}
