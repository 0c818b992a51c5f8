use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mfpt_core::chain::{parse_dense_txt, StochasticMatrix};
use mfpt_core::generators::{fixture, fixture_raw};
use mfpt_core::metrics::{ore, pze, residual_matrix};
use mfpt_core::diagnose;

fn mfpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfpt"))
        .args(args)
        .output()
        .expect("failed to launch mfpt")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn rows(csv_text: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        mfpt_cli::CSV_HEADER.to_vec()
    );
    r.records().map(Result::unwrap).collect()
}

fn field<'a>(rec: &'a csv::StringRecord, name: &str) -> &'a str {
    let idx = mfpt_cli::CSV_HEADER.iter().position(|h| *h == name).unwrap();
    &rec[idx]
}

#[test]
fn solve_fixture_with_least_squares() {
    let out = mfpt(&["solve", "--fixture", "P1", "--algo", "ls", "--repeats", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = rows(&stdout(&out));
    assert_eq!(recs.len(), 1);
    assert_eq!(field(&recs[0], "n"), "5");
    assert_eq!(field(&recs[0], "matrix"), "P1");
    assert_eq!(field(&recs[0], "repeats"), "3");
    let ore: f64 = field(&recs[0], "ore").parse().unwrap();
    assert!(ore <= 1e-12, "ore {ore}");
}

#[test]
fn emitted_matrix_matches_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("two.csv");
    let out = mfpt(&[
        "solve", "--two-state", "0.5", "0.5", "--algo", "ls", "--algo", "fundamental", "--emit-matrix",
        "--repeats", "1", "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let m = parse_dense_txt(&fs::read_to_string(dir.path().join("two.ls.mfpt.txt")).unwrap()).unwrap();
    assert_eq!(m.shape(), (2, 2));
    assert!(m.iter().all(|&v| (v - 2.0).abs() <= 1e-12));

    // every row's metrics are reproducible from the emitted matrix
    let p = mfpt_core::generators::two_state(0.5, 0.5).unwrap();
    for rec in rows(&fs::read_to_string(&out_path).unwrap()) {
        let algo = field(&rec, "algorithm");
        let m = parse_dense_txt(&fs::read_to_string(dir.path().join(format!("two.{algo}.mfpt.txt"))).unwrap())
            .unwrap();
        let eps = residual_matrix(&p, &m).unwrap();
        let csv_ore: f64 = field(&rec, "ore").parse().unwrap();
        let csv_pze: f64 = field(&rec, "pze").parse().unwrap();
        assert!((ore(&eps) - csv_ore).abs() <= 1e-12);
        assert!((pze(&eps) - csv_pze).abs() <= 1e-12);
    }
}

#[test]
fn non_converging_iteration_exits_with_solver_failure() {
    let out = mfpt(&["solve", "--fixture", "P4", "--algo", "xu", "--alpha", "0.5", "--repeats", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let recs = rows(&stdout(&out));
    assert_eq!(field(&recs[0], "ore"), "failed");
    assert!(field(&recs[0], "warning").contains("did not converge"));
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(mfpt(&["solve", "--fixture", "P9"]).status.code(), Some(1));
    assert_eq!(mfpt(&["solve", "--fixture", "P1", "--algo", "xu", "--alpha", "1.0"]).status.code(), Some(1));
    assert_eq!(mfpt(&["solve", "--fixture", "P1", "--repeats", "0"]).status.code(), Some(1));
    assert_eq!(mfpt(&["solve", "--fixture", "P1", "--algo", "bogus"]).status.code(), Some(1));
    assert_eq!(mfpt(&["solve"]).status.code(), Some(1));
    assert_eq!(mfpt(&["bench", "--sizes", ""]).status.code(), Some(1));
    assert_eq!(mfpt(&["validate", "/nonexistent/file.txt"]).status.code(), Some(1));
}

#[test]
fn periodic_chain_is_a_solver_failure() {
    let out = mfpt(&["solve", "--two-state", "1", "1", "--repeats", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(field(&rows(&stdout(&out))[0], "warning").contains("not regular"));
}

#[test]
fn bench_random_sparse_sweep() {
    let out = mfpt(&[
        "bench", "--family", "random-sparse", "--sizes", "10,110,210", "--algo", "ls", "--algo",
        "fundamental", "--seed", "3", "--repeats", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let recs = rows(&stdout(&out));
    assert_eq!(recs.len(), 6);
    let order: Vec<(&str, &str)> = recs.iter().map(|r| (field(r, "n"), field(r, "algorithm"))).collect();
    assert_eq!(
        order,
        vec![("10", "ls"), ("10", "fundamental"), ("110", "ls"), ("110", "fundamental"), ("210", "ls"), ("210", "fundamental")]
    );
    for r in &recs {
        let ore: f64 = field(r, "ore").parse().unwrap();
        assert!(ore.is_finite());
    }
}

#[test]
fn bench_random_walk_residual_magnitude() {
    let out = mfpt(&["bench", "--family", "random-walk", "--sizes", "100,500", "--algo", "ls", "--repeats", "1"]);
    assert_eq!(out.status.code(), Some(0));
    for r in rows(&stdout(&out)) {
        let ore: f64 = field(&r, "ore").parse().unwrap();
        assert!(ore <= 1e-3, "n = {} ore = {ore}", field(&r, "n"));
    }
}

#[test]
fn bench_output_is_deterministic_apart_from_timing() {
    let args = ["bench", "--family", "fixtures", "--algo", "ls", "--algo", "xu", "--algo", "mc", "--trials", "200", "--repeats", "1"];
    let strip = |o: Output| -> Vec<Vec<String>> {
        rows(&stdout(&o))
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(i, _)| mfpt_cli::CSV_HEADER[*i] != "mean_time_s")
                    .map(|(_, v)| v.to_string())
                    .collect()
            })
            .collect()
    };
    let a = strip(mfpt(&args));
    let b = strip(
        Command::new(env!("CARGO_BIN_EXE_mfpt"))
            .args(args)
            .env("MFPT_THREADS", "0")
            .output()
            .unwrap(),
    );
    assert_eq!(a.len(), 12);
    assert_eq!(a, b);
}

fn gen_to(dir: &Path, name: &str, args: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = mfpt(&full);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn gen_and_validate() {
    let dir = tempfile::tempdir().unwrap();

    let p3 = gen_to(dir.path(), "p3.txt", &["--fixture", "P3"]);
    let out = mfpt(&["validate", p3.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("irreducible: true") && text.contains("aperiodic: true"), "{text}");

    let p2 = gen_to(dir.path(), "p2.txt", &["--fixture", "P2"]);
    assert_eq!(parse_dense_txt(&fs::read_to_string(&p2).unwrap()).unwrap(), fixture_raw("P2").unwrap());
    // stored P2 rows miss 1 by ~1e-6: strict validation fails, re-normalized passes
    assert_eq!(mfpt(&["validate", p2.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(mfpt(&["validate", p2.to_str().unwrap(), "--renormalize"]).status.code(), Some(0));

    let rs = gen_to(dir.path(), "rs.txt", &["--random-sparse", "50", "--a", "0.4", "--seed", "7"]);
    let out = mfpt(&["validate", rs.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("irreducible: true"));

    let rw = gen_to(dir.path(), "rw.txt", &["--random-walk", "100"]);
    let m = parse_dense_txt(&fs::read_to_string(&rw).unwrap()).unwrap();
    for i in 0..100usize {
        for j in 0..100 {
            if i.abs_diff(j) > 1 {
                assert_eq!(m[(i, j)], 0.0);
            }
        }
    }

    let rw5 = gen_to(dir.path(), "rw5.txt", &["--random-walk", "5"]);
    let text = stdout(&mfpt(&["validate", rw5.to_str().unwrap()]));
    assert!(text.contains("symmetric: true") && text.contains("period: 1"), "{text}");

    let bad = dir.path().join("neg.txt");
    fs::write(&bad, "3\n0.6 0.5 -0.1\n0.5 0 0.5\n0.5 0.5 0\n").unwrap();
    let out = mfpt(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("negative entry -0.1 at (0, 2)"));

    let garbled = dir.path().join("garbled.txt");
    fs::write(&garbled, "2\n0.5 0.5\n0.5 zero\n").unwrap();
    let out = mfpt(&["validate", garbled.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn solve_reads_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = gen_to(dir.path(), "p1.txt", &["--fixture", "P1"]);
    assert_eq!(mfpt(&["solve", "--matrix", p1.to_str().unwrap()]).status.code(), Some(1));
    let out = mfpt(&["solve", "--matrix", p1.to_str().unwrap(), "--renormalize", "--repeats", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let ore: f64 = field(&rows(&stdout(&out))[0], "ore").parse().unwrap();
    assert!(ore <= 1e-12);

    let renorm = StochasticMatrix::renormalized(parse_dense_txt(&fs::read_to_string(&p1).unwrap()).unwrap()).unwrap();
    assert_eq!(renorm, fixture("P1").unwrap());
    assert!(diagnose(&renorm).is_regular());
}
