use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mfpt_core::generators::{fixture, random_sparse, random_walk};
use mfpt_core::linsolve::MinNormMethod;
use mfpt_core::solvers::{solve_fundamental, solve_ls_with, solve_xu};
use mfpt_core::Parallelism;

fn fixtures(c: &mut Criterion) {
    let mut group = c.benchmark_group("fixtures");
    for name in ["P1", "P2", "P3", "P4"] {
        let p = fixture(name).unwrap();
        group.bench_with_input(BenchmarkId::new("ls", name), &p, |b, p| {
            b.iter(|| solve_ls_with(p, None, MinNormMethod::CompleteOrthogonal, Parallelism::Sequential))
        });
        group.bench_with_input(BenchmarkId::new("fundamental", name), &p, |b, p| {
            b.iter(|| solve_fundamental(p))
        });
        if name != "P4" {
            group.bench_with_input(BenchmarkId::new("xu", name), &p, |b, p| {
                b.iter(|| solve_xu(p, 0.5, 1e-10, 100_000, None))
            });
        }
    }
    group.finish();
}

fn random_sparse_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("random_sparse");
    group.sample_size(10);
    for n in [10, 60, 110] {
        let p = random_sparse(n, 0.4, 1).unwrap();
        group.bench_with_input(BenchmarkId::new("ls", n), &p, |b, p| {
            b.iter(|| solve_ls_with(p, None, MinNormMethod::CompleteOrthogonal, Parallelism::Sequential))
        });
        group.bench_with_input(BenchmarkId::new("fundamental", n), &p, |b, p| {
            b.iter(|| solve_fundamental(p))
        });
    }
    group.finish();
}

fn random_walk_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("random_walk");
    group.sample_size(10);
    for n in [50, 100] {
        let p = random_walk(n).unwrap();
        group.bench_with_input(BenchmarkId::new("ls", n), &p, |b, p| {
            b.iter(|| solve_ls_with(p, None, MinNormMethod::CompleteOrthogonal, Parallelism::Auto))
        });
        group.bench_with_input(BenchmarkId::new("fundamental", n), &p, |b, p| {
            b.iter(|| solve_fundamental(p))
        });
    }
    group.finish();
}

criterion_group!(benches, fixtures, random_sparse_sweep, random_walk_sweep);
criterion_main!(benches);
