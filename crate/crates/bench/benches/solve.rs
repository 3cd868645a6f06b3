use criterion::{criterion_group, criterion_main, Criterion};
use radau_bench::point;
use radau_core::solve;

fn problems(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    for (name, rtol, atol) in [("oregonator", 1e-8, 1e-10), ("robertson", 1e-6, 1e-11), ("hires", 1e-8, 1e-10), ("pollution", 1e-7, 1e-11)] {
        let (prob, opts) = point(name, rtol, atol);
        g.bench_function(format!("{name}/adaptive"), |b| b.iter(|| solve(&prob, &opts).unwrap()));
        let fixed = opts.clone().fixed_order(5);
        g.bench_function(format!("{name}/order5"), |b| b.iter(|| solve(&prob, &fixed).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, problems);
criterion_main!(benches);
