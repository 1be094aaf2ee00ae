use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use twodisk::hybrid::{HybridCoefficients, MultipoleSet};
use twodisk::oracle::{BieSystem, Source};
use twodisk::resonant::ResonantExpansion;
use twodisk::{BipolarFrame, DiskPair, DrudeModel};

fn reference() -> (DiskPair, BipolarFrame, num_complex::Complex64) {
    let pair = DiskPair::new(1.0, 0.1).unwrap();
    let lambda = DrudeModel::new(3.0, 0.02).unwrap().spectral_param(1.45).unwrap().lambda;
    (pair, BipolarFrame::new(pair).unwrap(), lambda)
}

fn series(c: &mut Criterion) {
    let (_, frame, lambda) = reference();
    let mut group = c.benchmark_group("origin_gradient");
    for n in [5, 20, 80] {
        group.bench_with_input(BenchmarkId::new("resonant", n), &n, |b, &n| {
            b.iter(|| ResonantExpansion::build(&frame, black_box(lambda), n).unwrap().gradient_at_origin())
        });
    }
    let table = HybridCoefficients::new(&frame, 200, 80);
    for m in [5, 20, 80] {
        group.bench_with_input(BenchmarkId::new("hybrid", m), &m, |b, &m| {
            b.iter(|| MultipoleSet::build(&table, black_box(lambda), m, 200).unwrap().gradient_at_origin())
        });
    }
    group.finish();

    c.bench_function("hybrid_coefficient_table_200x80", |b| b.iter(|| HybridCoefficients::new(black_box(&frame), 200, 80)));
}

fn solver(c: &mut Criterion) {
    let (pair, _, lambda) = reference();
    let mut group = c.benchmark_group("nystrom");
    group.sample_size(10);
    for p in [64, 128, 256] {
        group.bench_with_input(BenchmarkId::new("assemble", p), &p, |b, &p| b.iter(|| BieSystem::discretize(black_box(pair), p).unwrap()));
        let system = BieSystem::discretize(pair, p).unwrap();
        group.bench_with_input(BenchmarkId::new("solve", p), &p, |b, _| {
            b.iter(|| system.solve_densities(black_box(lambda), Source::X1).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, series, solver);
criterion_main!(benches);
