use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64 as C64;
use rifclark::quadrature::random_interior_points;
use rifclark::{blaschke, clark, corpus, levelset};
use std::hint::black_box;

fn slice_roots(c: &mut Criterion) {
    let rif = corpus::favard_squared();
    let base = [C64::from_polar(1.0, 0.7)];
    let alpha = C64::from_polar(1.0, 1.1);
    c.bench_function("slice_roots/favard_squared", |b| {
        b.iter(|| blaschke::slice_roots(black_box(&rif), black_box(&base), alpha).unwrap())
    });
}

fn trace(c: &mut Criterion) {
    let mut g = c.benchmark_group("trace_branches");
    let rif = corpus::favard_squared();
    let alpha = C64::from_polar(1.0, 2.0);
    for n in [1024usize, 4096] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| levelset::trace_branches(&rif, alpha, n).unwrap())
        });
    }
    g.finish();
}

fn measure(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_measure");
    g.sample_size(10);
    for (name, alpha) in [("generic", C64::from_polar(1.0, 2.0)), ("exceptional", C64::new(-1.0, 0.0))] {
        let rif = corpus::favard_squared();
        g.bench_function(name, |b| b.iter(|| clark::build_measure(&rif, alpha, 4096).unwrap()));
    }
    g.finish();
}

fn poisson(c: &mut Criterion) {
    let rif = corpus::favard();
    let mu = clark::build_measure(&rif, C64::new(0.0, 1.0), 8192).unwrap();
    let pts = random_interior_points(1, 20, 2, 0.7);
    let mut g = c.benchmark_group("verify_poisson");
    g.sample_size(10);
    g.bench_function("favard/8192x20", |b| b.iter(|| clark::verify_poisson(&mu, &rif, black_box(&pts)).unwrap()));
    g.finish();
}

criterion_group!(benches, slice_roots, trace, measure, poisson);
criterion_main!(benches);
