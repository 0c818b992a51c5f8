use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mfpt_core::generators::DEFAULT_SPARSE_THRESHOLD;
use mfpt_core::Algorithm;

#[derive(Debug, Parser)]
#[command(name = "mfpt", version, about = "Mean first passage times of ergodic Markov chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one chain and write a CSV report row per algorithm.
    Solve(SolveArgs),
    /// Sweep a matrix family over sizes and write one CSV row per (matrix, algorithm).
    Bench(BenchArgs),
    /// Check a dense-txt matrix and print its structural diagnosis.
    Validate(ValidateArgs),
    /// Write a fixture or generated matrix in dense-txt format.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct SourceArgs {
    /// Built-in test matrix P1..P4.
    #[arg(long, value_name = "NAME")]
    pub fixture: Option<String>,
    /// Dense-txt matrix file.
    #[arg(long, value_name = "PATH")]
    pub matrix: Option<PathBuf>,
    /// Random sparse irreducible chain with N states (see --a, --seed).
    #[arg(long, value_name = "N")]
    pub random_sparse: Option<usize>,
    /// Reflecting random walk with N states.
    #[arg(long, value_name = "N")]
    pub random_walk: Option<usize>,
    /// Two-state chain [[1-A, A], [B, 1-B]].
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub two_state: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorKnobs {
    /// Entry threshold for --random-sparse.
    #[arg(long, default_value_t = DEFAULT_SPARSE_THRESHOLD)]
    pub a: f64,
    /// Seed for random generation and Monte Carlo.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Solver to run; repeat for several.
    #[arg(long = "algo", value_parser = parse_algorithm, default_value = "ls")]
    pub algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Convergence threshold on the entrywise change between iterates.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Absolute rank threshold for the least-squares solves (default n*eps*||A||_inf).
    #[arg(long)]
    pub rank_tol: Option<f64>,
    /// Timed runs per (matrix, algorithm); the mean is reported.
    #[arg(long, default_value_t = 20)]
    pub repeats: usize,
    /// Monte Carlo trajectories per start state.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Monte Carlo step cap per trajectory (default 1000*n).
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Divide every row by its sum before validation.
    #[arg(long)]
    pub renormalize: bool,
    /// Run cells and columns on one thread.
    #[arg(long)]
    pub timing_strict: bool,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: mfpt_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub generator: GeneratorKnobs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Also write each MFPT matrix as dense-txt next to the report.
    #[arg(long)]
    pub emit_matrix: bool,
    /// CSV report path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    RandomSparse,
    RandomWalk,
    Fixtures,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "random-sparse")]
    pub family: Family,
    /// Comma-separated state counts; defaults to 10..=510 step 100 (random-sparse)
    /// or 100..=2000 step 100 (random-walk).
    #[arg(long, value_name = "LIST")]
    pub sizes: Option<String>,
    #[command(flatten)]
    pub generator: GeneratorKnobs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub path: PathBuf,
    #[arg(long)]
    pub renormalize: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub generator: GeneratorKnobs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
