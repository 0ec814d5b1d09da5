use criterion::{black_box, criterion_group, criterion_main, Criterion};
use papdiff_core::gallery::{CantorApprox, Gallery};

fn tables(c: &mut Criterion) {
    c.bench_function("build depth-15 tables", |b| {
        b.iter(|| CantorApprox::new(0.5, black_box(15)).unwrap())
    });
}

fn functions(c: &mut Criterion) {
    let gal = Gallery::new(20).unwrap();
    c.bench_function("phi depth 20", |b| {
        b.iter(|| gal.c_one().phi(black_box(0.123456)).unwrap())
    });
    c.bench_function("inverse by bisection depth 20", |b| {
        b.iter(|| gal.f(black_box(0.37)).unwrap())
    });
    c.bench_function("claim3 probe 50 midpoints", |b| {
        b.iter(|| gal.probe_claim3(50, 100, 1).unwrap())
    });
}

criterion_group!(benches, tables, functions);
criterion_main!(benches);
