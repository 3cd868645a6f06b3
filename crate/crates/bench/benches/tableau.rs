use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use radau_core::solver::factor_blocks;
use radau_core::tableau::build_method;
use radau_core::{Matrix, MpFloat};
use std::hint::black_box;

fn derivation(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_method");
    for s in [3usize, 7, 13] {
        g.bench_with_input(BenchmarkId::new("f64", s), &s, |b, &s| b.iter(|| build_method::<f64>(black_box(s), 53).unwrap()));
        g.bench_with_input(BenchmarkId::new("mp256", s), &s, |b, &s| {
            b.iter(|| build_method::<MpFloat>(black_box(s), 256).unwrap())
        });
    }
    g.finish();
}

fn factorization(c: &mut Criterion) {
    let mut g = c.benchmark_group("factor_blocks");
    let n = 20;
    let jac = Matrix::from_fn(n, n, |i, j| if i == j { -10.0 - i as f64 } else { 1.0 / (1.0 + (i + 2 * j) as f64) });
    for s in [3usize, 7, 13] {
        let m = build_method::<f64>(s, 53).unwrap();
        for parallel in [false, true] {
            let id = BenchmarkId::new(if parallel { "parallel" } else { "serial" }, s);
            g.bench_with_input(id, &s, |b, _| b.iter(|| factor_blocks(&m.transform, &jac, &0.01, 0, parallel).unwrap()));
        }
    }
    g.finish();
}

criterion_group!(benches, derivation, factorization);
criterion_main!(benches);
