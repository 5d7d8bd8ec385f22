use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hsi_rpca::solver::lambda_scale;
use hsi_rpca::{admm_solve_c, group_soft_threshold, singular_value_shrink, solve, SolverConfig};
use hsi_rpca_bench::{dense, problem};

fn svt(c: &mut Criterion) {
    let mut group = c.benchmark_group("svt");
    for (rows, cols) in [(100, 50), (2500, 186), (10000, 186)] {
        let m = dense(rows, cols);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{rows}x{cols}")), &m, |b, m| {
            b.iter(|| singular_value_shrink(black_box(m.as_ref()), 1.0).unwrap())
        });
    }
    group.finish();
}

fn group_threshold(c: &mut Criterion) {
    let mut group = c.benchmark_group("group_threshold");
    for (atoms, pixels) in [(1, 10000), (4, 10000), (10, 1000)] {
        let m = dense(atoms, pixels);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{atoms}x{pixels}")), &m, |b, m| {
            b.iter(|| group_soft_threshold(black_box(m.as_ref()), 0.5).unwrap())
        });
    }
    group.finish();
}

fn admm(c: &mut Criterion) {
    let mut group = c.benchmark_group("admm");
    group.sample_size(20);
    for (pixels, atoms) in [(2500, 1), (10000, 1), (2500, 4)] {
        let (d, at) = problem(pixels, 186, atoms, 4);
        let r = d.transpose().to_owned();
        let lambda = lambda_scale(d.as_ref(), at.as_ref()).unwrap();
        let cfg = SolverConfig::new(1.0, lambda);
        group.bench_function(BenchmarkId::from_parameter(format!("{pixels}px_{atoms}atoms")), |b| {
            b.iter(|| admm_solve_c(black_box(r.as_ref()), at.as_ref(), lambda, &cfg, None).unwrap())
        });
    }
    group.finish();
}

fn small_solve(c: &mut Criterion) {
    let (d, at) = problem(200, 30, 3, 3);
    let s1 = hsi_rpca::linalg::spectral_norm(d.as_ref()).unwrap();
    let lambda = lambda_scale(d.as_ref(), at.as_ref()).unwrap();
    let cfg = SolverConfig::new(0.3 * s1, lambda);
    let mut group = c.benchmark_group("solve");
    group.sample_size(20);
    group.bench_function("200x30_3atoms", |b| b.iter(|| solve(black_box(d.as_ref()), at.as_ref(), &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, svt, group_threshold, admm, small_solve);
criterion_main!(benches);
