use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};

use mfpt_core::chain::{format_dense_txt, parse_dense_txt};
use mfpt_core::generators::{fixture_raw, FIXTURE_NAMES};
use mfpt_core::linsolve::{min_norm_solve, CONDITION_WARNING_RATIO};
use mfpt_core::metrics::{timed, ResidualReport};
use mfpt_core::{
    diagnose, solve, Algorithm, DMatrix, DVector, Error, GeneratorSpec, MfptMatrix, Parallelism,
    SolverConfig, StochasticMatrix,
};

use crate::args::{BenchArgs, Family, GenArgs, GeneratorKnobs, SolveArgs, SolverArgs, SourceArgs, ValidateArgs};
use crate::report::{write_csv, BenchRow, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

/// A failed command and the exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::input(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::input(format!("csv error: {e}"))
    }
}

/// Where a chain comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Generator(GeneratorSpec),
    File(PathBuf),
}

impl Source {
    pub fn from_args(src: &SourceArgs, knobs: &GeneratorKnobs) -> Result<Self, Failure> {
        let spec = if let Some(name) = &src.fixture {
            GeneratorSpec::Fixture(name.to_ascii_uppercase())
        } else if let Some(path) = &src.matrix {
            return Ok(Source::File(path.clone()));
        } else if let Some(n) = src.random_sparse {
            GeneratorSpec::RandomSparse { n, a: knobs.a, seed: knobs.seed }
        } else if let Some(n) = src.random_walk {
            GeneratorSpec::RandomWalk { n }
        } else if let Some(ab) = &src.two_state {
            GeneratorSpec::TwoState { a: ab[0], b: ab[1] }
        } else {
            return Err(Failure::input("no matrix source given"));
        };
        Ok(Source::Generator(spec))
    }

    pub fn label(&self) -> String {
        match self {
            Source::Generator(spec) => spec.to_string(),
            Source::File(path) => path.display().to_string(),
        }
    }

    /// Matrix as stored, without re-normalization.
    pub fn load_raw(&self) -> Result<DMatrix<f64>, Failure> {
        match self {
            Source::Generator(spec) => spec.generate_raw().map_err(input_error),
            Source::File(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
                parse_dense_txt(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
            }
        }
    }

    /// Validated chain. Fixtures are always re-normalized; files only when asked.
    pub fn load(&self, renormalize: bool) -> Result<StochasticMatrix, Failure> {
        match self {
            Source::Generator(spec) => spec.generate().map_err(input_error),
            Source::File(_) => {
                let raw = self.load_raw()?;
                let p = if renormalize { StochasticMatrix::renormalized(raw) } else { StochasticMatrix::new(raw) };
                p.map_err(input_error)
            }
        }
    }
}

fn input_error(e: Error) -> Failure {
    Failure::input(e.to_string())
}

/// Everything a solve or bench run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithms: Vec<Algorithm>,
    pub repeats: usize,
    pub solver: SolverConfig,
    pub renormalize: bool,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(s: &SolverArgs, seed: u64, out: Option<PathBuf>) -> Result<Self, Failure> {
        if s.repeats == 0 {
            return Err(Failure::input("--repeats must be at least 1"));
        }
        let mut algorithms = Vec::new();
        for a in &s.algorithms {
            if !algorithms.contains(a) {
                algorithms.push(*a);
            }
        }
        if algorithms.is_empty() {
            return Err(Failure::input("at least one --algo is required"));
        }
        if algorithms.contains(&Algorithm::Xu) {
            if !(0.0..1.0).contains(&s.alpha) {
                return Err(input_error(Error::AlphaOutOfRange(s.alpha)));
            }
            if !(s.tol > 0.0) {
                return Err(Failure::input("--tol must be positive"));
            }
        }
        if algorithms.contains(&Algorithm::Mc) && s.trials == 0 {
            return Err(Failure::input("--trials must be at least 1"));
        }
        if let Some(rt) = s.rank_tol {
            if !(rt > 0.0) {
                return Err(Failure::input("--rank-tol must be positive"));
            }
        }
        let parallelism = if s.timing_strict { Parallelism::Sequential } else { Parallelism::from_env() };
        let solver = SolverConfig {
            alpha: s.alpha,
            tol: s.tol,
            max_iter: s.max_iter,
            rank_tol: s.rank_tol,
            seed,
            trials: s.trials,
            horizon: s.horizon,
            parallelism,
            ..SolverConfig::default()
        };
        Ok(RunConfig { algorithms, repeats: s.repeats, solver, renormalize: s.renormalize, out })
    }
}

/// Runs one algorithm `repeats` times on `p`; metrics come from the last run.
pub fn run_cell(
    label: &str,
    p: &StochasticMatrix,
    algorithm: Algorithm,
    config: &RunConfig,
) -> (BenchRow, Option<MfptMatrix>) {
    let solver = SolverConfig { algorithm, ..config.solver.clone() };
    let mut total = 0.0;
    let mut runs = 0;
    let mut last = None;
    for _ in 0..config.repeats {
        let (res, t) = timed(|| solve(p, &solver));
        total += t;
        runs += 1;
        let failed = res.is_err();
        last = Some(res);
        if failed {
            break;
        }
    }
    let mean_time_s = total / runs as f64;
    let failed_row = |warning: String| BenchRow {
        n: p.n(),
        matrix: label.to_string(),
        algorithm,
        alpha: (algorithm == Algorithm::Xu).then_some(solver.alpha),
        repeats: config.repeats,
        mean_time_s,
        outcome: Outcome::Failed,
        warning,
    };
    match last {
        Some(Ok(m)) => match ResidualReport::new(p, &m, mean_time_s) {
            Ok(report) => (BenchRow::solved(label.to_string(), &report, &m, config.repeats), Some(m)),
            Err(e) => (failed_row(e.to_string()), None),
        },
        Some(Err(e)) => {
            warn!("{algorithm} on {label}: {e}");
            (failed_row(e.to_string()), None)
        }
        None => (failed_row("not run".into()), None),
    }
}

fn write_output(out: Option<&Path>, body: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => {
            io::stdout().write_all(body)?;
            Ok(())
        }
    }
}

fn csv_bytes(rows: &[BenchRow]) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(buf)
}

/// Path of the dense-txt MFPT matrix written by `solve --emit-matrix`:
/// `<out stem>.<algo>.mfpt.txt` beside the report, or `mfpt.<algo>.mfpt.txt`.
pub fn emitted_matrix_path(out: Option<&Path>, algorithm: Algorithm) -> PathBuf {
    let (dir, stem) = match out {
        Some(p) => (
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
            p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "mfpt".into()),
        ),
        None => (PathBuf::new(), "mfpt".into()),
    };
    dir.join(format!("{stem}.{}.mfpt.txt", algorithm.tag()))
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32, Failure> {
    let source = Source::from_args(&args.source, &args.generator)?;
    let config = RunConfig::from_args(&args.solver, args.generator.seed, args.out.clone())?;
    let p = source.load(config.renormalize)?;
    let label = source.label();

    let mut rows = Vec::new();
    let mut code = EXIT_OK;
    for &algorithm in &config.algorithms {
        let (row, m) = run_cell(&label, &p, algorithm, &config);
        info!("{label} {algorithm}: {:?}", row.outcome);
        if row.is_failed() {
            code = EXIT_SOLVER;
        }
        if let (true, Some(m)) = (args.emit_matrix, &m) {
            let path = emitted_matrix_path(config.out.as_deref(), algorithm);
            fs::write(&path, format_dense_txt(&m.values))
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        }
        rows.push(row);
    }
    write_output(config.out.as_deref(), &csv_bytes(&rows)?)?;
    Ok(code)
}

pub const DEFAULT_SPARSE_SIZES: std::ops::RangeInclusive<usize> = 10..=510;
pub const DEFAULT_WALK_SIZES: std::ops::RangeInclusive<usize> = 100..=2000;

pub fn parse_sizes(list: &str) -> Result<Vec<usize>, Failure> {
    let sizes: Vec<usize> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Failure::input(format!("invalid size {s:?}"))))
        .collect::<Result<_, _>>()?;
    if sizes.is_empty() {
        return Err(Failure::input("empty size sweep"));
    }
    if let Some(bad) = sizes.iter().find(|&&n| n < 2) {
        return Err(Failure::input(format!("sweep sizes must be at least 2, got {bad}")));
    }
    Ok(sizes)
}

/// Matrices of one sweep, in output order.
pub fn sweep_sources(family: Family, sizes: Option<&str>, knobs: &GeneratorKnobs) -> Result<Vec<GeneratorSpec>, Failure> {
    let sizes = match (family, sizes) {
        (Family::Fixtures, _) => Vec::new(),
        (_, Some(list)) => parse_sizes(list)?,
        (Family::RandomSparse, None) => DEFAULT_SPARSE_SIZES.step_by(100).collect(),
        (Family::RandomWalk, None) => DEFAULT_WALK_SIZES.step_by(100).collect(),
    };
    Ok(match family {
        Family::Fixtures => FIXTURE_NAMES.iter().map(|n| GeneratorSpec::Fixture(n.to_string())).collect(),
        Family::RandomSparse => sizes
            .into_iter()
            .map(|n| GeneratorSpec::RandomSparse { n, a: knobs.a, seed: knobs.seed })
            .collect(),
        Family::RandomWalk => sizes.into_iter().map(|n| GeneratorSpec::RandomWalk { n }).collect(),
    })
}

/// Runs every (matrix, algorithm) cell; a failing cell becomes a `failed` row.
pub fn run_sweep(specs: &[GeneratorSpec], config: &RunConfig) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for spec in specs {
        let label = spec.to_string();
        let p = match spec.generate() {
            Ok(p) => p,
            Err(e) => {
                warn!("{label}: {e}");
                for &algorithm in &config.algorithms {
                    rows.push(BenchRow {
                        n: spec_size(spec),
                        matrix: label.clone(),
                        algorithm,
                        alpha: None,
                        repeats: config.repeats,
                        mean_time_s: 0.0,
                        outcome: Outcome::Failed,
                        warning: e.to_string(),
                    });
                }
                continue;
            }
        };
        for &algorithm in &config.algorithms {
            let (row, _) = run_cell(&label, &p, algorithm, config);
            info!("{label} {algorithm}: {:.4}s", row.mean_time_s);
            rows.push(row);
        }
    }
    rows
}

fn spec_size(spec: &GeneratorSpec) -> usize {
    match spec {
        GeneratorSpec::RandomSparse { n, .. } | GeneratorSpec::RandomWalk { n } => *n,
        GeneratorSpec::TwoState { .. } => 2,
        GeneratorSpec::Fixture(name) => fixture_raw(name).map(|m| m.nrows()).unwrap_or(0),
    }
}

pub fn cmd_bench(args: &BenchArgs) -> Result<i32, Failure> {
    let config = RunConfig::from_args(&args.solver, args.generator.seed, args.out.clone())?;
    let specs = sweep_sources(args.family, args.sizes.as_deref(), &args.generator)?;
    let rows = run_sweep(&specs, &config);
    write_output(config.out.as_deref(), &csv_bytes(&rows)?)?;
    Ok(EXIT_OK)
}

/// Text report printed by `validate`.
/// Diagnostic text for `raw`. On a validation error the partial report is
/// returned alongside the failure.
pub fn validation_report(raw: DMatrix<f64>, renormalize: bool) -> (String, Result<(), Failure>) {
    use std::fmt::Write as _;
    let mut out = String::new();
    let n = raw.nrows();
    let _ = writeln!(out, "n: {n}");
    let deviations: Vec<f64> = raw.row_iter().map(|r| (r.sum() - 1.0).abs()).collect();
    let max_dev = deviations.iter().cloned().fold(0.0, f64::max);
    let _ = writeln!(out, "max_row_sum_deviation: {max_dev:e}");
    for (i, d) in deviations.iter().enumerate() {
        if *d > mfpt_core::chain::ROW_SUM_TOL {
            let _ = writeln!(out, "row {i} sum deviation: {d:e}");
        }
    }
    let p = if renormalize { StochasticMatrix::renormalized(raw) } else { StochasticMatrix::new(raw) };
    let p = match p {
        Ok(p) => p,
        Err(e) => return (out, Err(Failure::input(e.to_string()))),
    };
    let d = diagnose(&p);
    let _ = writeln!(out, "renormalized: {renormalize}");
    let _ = writeln!(out, "irreducible: {}", d.irreducible);
    let _ = writeln!(out, "aperiodic: {}", d.aperiodic);
    let _ = writeln!(out, "period: {}", d.period);
    let _ = writeln!(out, "symmetric: {}", p.is_symmetric());

    let mut a = -p.matrix();
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    match min_norm_solve(&a, &DVector::zeros(n), None) {
        Ok(probe) => {
            let _ = writeln!(out, "rank_i_minus_p: {}", probe.rank);
            let _ = writeln!(out, "pivot_ratio: {:e}", probe.pivot_ratio);
            let _ = writeln!(out, "condition_warning: {}", probe.pivot_ratio > CONDITION_WARNING_RATIO);
            (out, Ok(()))
        }
        Err(e) => (out, Err(input_error(e))),
    }
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<i32, Failure> {
    let raw = Source::File(args.path.clone()).load_raw()?;
    let (report, status) = validation_report(raw, args.renormalize);
    print!("{report}");
    status.map(|()| EXIT_OK)
}

pub fn cmd_gen(args: &GenArgs) -> Result<i32, Failure> {
    let source = Source::from_args(&args.source, &args.generator)?;
    let raw = source.load_raw()?;
    write_output(args.out.as_deref(), format_dense_txt(&raw).as_bytes())?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("10, 110,210").unwrap(), vec![10, 110, 210]);
        assert_eq!(parse_sizes("").unwrap_err().code, EXIT_INPUT);
        assert_eq!(parse_sizes(" , ").unwrap_err().message, "empty size sweep");
        assert!(parse_sizes("1").is_err());
        assert!(parse_sizes("ten").is_err());
    }

    #[test]
    fn default_sweep_ranges() {
        let knobs = GeneratorKnobs { a: 0.4, seed: 1 };
        let sparse = sweep_sources(Family::RandomSparse, None, &knobs).unwrap();
        assert_eq!(sparse.len(), 6);
        assert_eq!(sparse[5], GeneratorSpec::RandomSparse { n: 510, a: 0.4, seed: 1 });
        let walk = sweep_sources(Family::RandomWalk, None, &knobs).unwrap();
        assert_eq!(walk.first(), Some(&GeneratorSpec::RandomWalk { n: 100 }));
        assert_eq!(walk.last(), Some(&GeneratorSpec::RandomWalk { n: 2000 }));
        assert_eq!(sweep_sources(Family::Fixtures, Some(""), &knobs).unwrap().len(), 4);
    }

    #[test]
    fn matrix_paths() {
        assert_eq!(
            emitted_matrix_path(Some(Path::new("out/run.csv")), Algorithm::Ls),
            PathBuf::from("out/run.ls.mfpt.txt")
        );
        assert_eq!(emitted_matrix_path(None, Algorithm::Xu), PathBuf::from("mfpt.xu.mfpt.txt"));
    }

    #[test]
    fn validation_flags_row_sums() {
        let raw = fixture_raw("P1").unwrap();
        let (partial, status) = validation_report(raw.clone(), false);
        assert!(partial.contains("row 0 sum deviation"));
        assert!(status.unwrap_err().message.contains("row 0 sums to"));
        let (ok, status) = validation_report(raw, true);
        assert!(status.is_ok());
        assert!(ok.contains("irreducible: true"));
        assert!(ok.contains("rank_i_minus_p: 4"));
    }
}
