use thiserror::Error;

/// Errors raised by validation, factorization and the MFPT solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("a chain needs at least 2 states, got {0}")]
    TooFewStates(usize),

    #[error("entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("entry {value} at ({row}, {col}) exceeds 1")]
    EntryAboveOne { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, not 1")]
    RowSumViolation { row: usize, sum: f64 },

    #[error("cannot re-normalize row {row}: it sums to {sum}")]
    DegenerateRow { row: usize, sum: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("linear system is numerically singular")]
    SingularSystem,

    #[error("pivot {pivot} of the LU factorization vanished")]
    SingularPivot { pivot: usize },

    #[error("least-squares system is incompatible (residual norm {residual_norm:e})")]
    IncompatibleSystem { residual_norm: f64 },

    #[error("chain is not regular (irreducible: {irreducible}, period: {period})")]
    NotErgodic { irreducible: bool, period: usize },

    #[error("state index {index} out of range for {n} states")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("iteration did not converge after {iterations} steps (last delta {delta:e})")]
    MaxIterExceeded { iterations: usize, delta: f64 },

    #[error("alpha must satisfy 0 <= alpha < 1, got {0}")]
    AlphaOutOfRange(f64),

    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("matrix generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
