//! Test-matrix sources: literal fixtures, random sparse irreducible chains,
//! the reflecting random walk, and the closed-form two-state family.
//!
//! Random generation uses ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`, drawing uniforms on `[0, 1)` in row-major order.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{diagnose, StochasticMatrix};
use crate::error::{Error, Result};

/// Resample budget for [`random_sparse`].
pub const MAX_GENERATION_ATTEMPTS: usize = 1000;

/// Density threshold used for the published random sparse experiments.
pub const DEFAULT_SPARSE_THRESHOLD: f64 = 0.4;

pub const FIXTURE_NAMES: [&str; 4] = ["P1", "P2", "P3", "P4"];

#[rustfmt::skip]
const P1: [f64; 25] = [
    0.136267, 0.292549, 0.266992, 0.220856, 0.083335,
    0.198798, 0.019347, 0.129998, 0.321252, 0.330605,
    0.246269, 0.215116, 0.044021, 0.249831, 0.244763,
    0.400950, 0.149352, 0.012546, 0.303336, 0.133815,
    0.200328, 0.084084, 0.351278, 0.337325, 0.026985,
];

#[rustfmt::skip]
const P2: [f64; 36] = [
    0.268031, 0.255740, 0.201497, 0.265012, 0.007385, 0.002335,
    0.166582, 0.137728, 0.032748, 0.118446, 0.187835, 0.356660,
    0.093279, 0.226108, 0.081331, 0.206803, 0.094199, 0.298281,
    0.103853, 0.230590, 0.261709, 0.069110, 0.061473, 0.273265,
    0.101657, 0.261742, 0.128131, 0.002138, 0.204864, 0.301467,
    0.216100, 0.210158, 0.154059, 0.178624, 0.213131, 0.027928,
];

#[rustfmt::skip]
const P3: [f64; 25] = [
    0.000000, 0.701299, 0.298701, 0.000000, 0.000000,
    0.000000, 0.000000, 0.437907, 0.562093, 0.000000,
    0.000000, 0.000000, 0.000000, 0.632082, 0.367918,
    0.471475, 0.000000, 0.000000, 0.000000, 0.528525,
    0.461323, 0.538677, 0.000000, 0.000000, 0.000000,
];

// near-absorbing states 0, 2, 3, 4
#[rustfmt::skip]
const P4: [f64; 25] = [
    0.999999, 1e-7, 2e-7, 3e-7, 4e-7,
    0.4,      0.3,  0.0,  0.0,  0.3,
    5e-7,     0.0,  0.999999, 0.0, 5e-7,
    5e-7,     0.0,  0.0,  0.999999, 5e-7,
    2e-7,     3e-7, 1e-7, 4e-7, 0.999999,
];

/// Named fixture entries as given to six decimals (rows may miss 1 by ~1e-6).
pub fn fixture_raw(name: &str) -> Result<DMatrix<f64>> {
    let (n, data): (usize, &[f64]) = match name.to_ascii_uppercase().as_str() {
        "P1" => (5, &P1),
        "P2" => (6, &P2),
        "P3" => (5, &P3),
        "P4" => (5, &P4),
        _ => return Err(Error::UnknownFixture(name.to_string())),
    };
    Ok(DMatrix::from_row_slice(n, n, data))
}

/// Named fixture with each row divided by its sum.
pub fn fixture(name: &str) -> Result<StochasticMatrix> {
    StochasticMatrix::renormalized(fixture_raw(name)?)
}

/// Uniform matrix, entries above `a` and the diagonal zeroed, rows
/// normalized; the whole matrix is redrawn until no row is empty and the
/// chain is irreducible.
pub fn random_sparse(n: usize, a: f64, seed: u64) -> Result<StochasticMatrix> {
    if n < 2 {
        return Err(Error::ParamOutOfRange(format!("random_sparse needs n >= 2, got {n}")));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::ParamOutOfRange(format!("random_sparse needs 0 < a < 1, got {a}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let u: f64 = rng.random();
                m[(i, j)] = if i != j && u <= a { u } else { 0.0 };
            }
        }
        let Ok(p) = StochasticMatrix::renormalized(m) else { continue };
        if diagnose(&p).irreducible {
            return Ok(p);
        }
    }
    Err(Error::GenerationFailed { attempts: MAX_GENERATION_ATTEMPTS })
}

/// Reflecting one-dimensional random walk: 0.75 holding at both ends,
/// interior rows `(0.25, 0.5, 0.25)`.
pub fn random_walk(n: usize) -> Result<StochasticMatrix> {
    if n < 2 {
        return Err(Error::ParamOutOfRange(format!("random_walk needs n >= 2, got {n}")));
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        if i > 0 {
            m[(i, i - 1)] = 0.25;
        }
        if i + 1 < n {
            m[(i, i + 1)] = 0.25;
        }
        m[(i, i)] = if i == 0 || i == n - 1 { 0.75 } else { 0.5 };
    }
    StochasticMatrix::new(m)
}

/// `[[1 - a, a], [b, 1 - b]]` with `0 < a, b <= 1`.
///
/// `a = b = 1` is the deterministic flip-flop, which is valid but periodic.
pub fn two_state(a: f64, b: f64) -> Result<StochasticMatrix> {
    for (name, v) in [("a", a), ("b", b)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::ParamOutOfRange(format!("two_state needs 0 < {name} <= 1, got {v}")));
        }
    }
    StochasticMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0 - a, a, b, 1.0 - b]))
}

/// Exact MFPT matrix of [`two_state`]: `[[(a+b)/b, 1/a], [1/b, (a+b)/a]]`.
pub fn two_state_exact_mfpt(a: f64, b: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[(a + b) / b, 1.0 / a, 1.0 / b, (a + b) / a])
}

/// A matrix source: a named fixture or a parametric family.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Fixture(String),
    RandomSparse { n: usize, a: f64, seed: u64 },
    RandomWalk { n: usize },
    TwoState { a: f64, b: f64 },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<StochasticMatrix> {
        match self {
            GeneratorSpec::Fixture(name) => fixture(name),
            GeneratorSpec::RandomSparse { n, a, seed } => random_sparse(*n, *a, *seed),
            GeneratorSpec::RandomWalk { n } => random_walk(*n),
            GeneratorSpec::TwoState { a, b } => two_state(*a, *b),
        }
    }

    /// Matrix as published, before any normalization. Only fixtures differ
    /// from [`GeneratorSpec::generate`].
    pub fn generate_raw(&self) -> Result<DMatrix<f64>> {
        match self {
            GeneratorSpec::Fixture(name) => fixture_raw(name),
            other => other.generate().map(StochasticMatrix::into_inner),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Fixture(name) => write!(f, "{name}"),
            GeneratorSpec::RandomSparse { n, a, seed } => {
                write!(f, "random_sparse(n={n};a={a};seed={seed})")
            }
            GeneratorSpec::RandomWalk { n } => write!(f, "random_walk(n={n})"),
            GeneratorSpec::TwoState { a, b } => write!(f, "two_state(a={a};b={b})"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    /// Accepts fixture names and the forms produced by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some((kind, rest)) = s.split_once('(') else {
            fixture_raw(s)?;
            return Ok(GeneratorSpec::Fixture(s.to_ascii_uppercase()));
        };
        let body = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::ParamOutOfRange(format!("unbalanced generator spec {s:?}")))?;
        let mut fields = std::collections::HashMap::new();
        for kv in body.split(';').filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::ParamOutOfRange(format!("bad field {kv:?}")))?;
            fields.insert(k.trim(), v.trim());
        }
        fn get<T: FromStr>(fields: &std::collections::HashMap<&str, &str>, key: &str) -> Result<T> {
            fields
                .get(key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::ParamOutOfRange(format!("missing or invalid field {key:?}")))
        }
        match kind {
            "random_sparse" => Ok(GeneratorSpec::RandomSparse {
                n: get(&fields, "n")?,
                a: get(&fields, "a")?,
                seed: get(&fields, "seed")?,
            }),
            "random_walk" => Ok(GeneratorSpec::RandomWalk { n: get(&fields, "n")? }),
            "two_state" => Ok(GeneratorSpec::TwoState { a: get(&fields, "a")?, b: get(&fields, "b")? }),
            other => Err(Error::ParamOutOfRange(format!("unknown generator {other:?}"))),
        }
    }
}
