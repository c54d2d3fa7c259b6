use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use gibbs_partitions::*;

fn bench_partition_numbers(c: &mut Criterion) {
    let mut group = c.benchmark_group("partition_number");
    for m in [100u64, 1000] {
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| partition_number(black_box(m)))
        });
    }
    group.finish();
}

fn bench_enumeration(c: &mut Criterion) {
    c.bench_function("enumerate_partitions/30", |b| {
        b.iter(|| enumerate_partitions(black_box(30)).unwrap().len())
    });
}

fn bench_series(c: &mut Criterion) {
    let mut group = c.benchmark_group("expected_monomers");
    for (name, model) in [
        ("uniform", EnergyModel::uniform()),
        ("constant", EnergyModel::constant(1.0, 1.0).unwrap()),
        ("critical", EnergyModel::log(0.5).unwrap()),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| expected_monomers(black_box(&model), black_box(1e-4), 1e-9).unwrap())
        });
    }
    group.finish();
}

fn bench_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_quantum");
    group.sample_size(20);
    for (name, mu) in [("dense_mu_2e-2", 2e-2), ("sparse_mu_2e-4", 2e-4)] {
        let config = SamplerConfig::new(
            EnergyModel::constant(1.0, 1.0).unwrap(),
            mu,
            EnsembleKind::QuantumGrandCanonical,
        )
        .with_replicas(100);
        group.bench_function(name, |b| b.iter(|| sample(black_box(&config)).unwrap()));
    }
    group.finish();
}

fn bench_special(c: &mut Criterion) {
    c.bench_function("special/dilog", |b| {
        b.iter(|| special::dilog(black_box(0.731)).unwrap())
    });
    c.bench_function("special/upper_gamma_q", |b| {
        b.iter(|| special::upper_incomplete_gamma_regularized(black_box(0.5), black_box(1.7)))
    });
    c.bench_function("special/e1", |b| {
        b.iter(|| special::exp_integral_e1(black_box(1.3)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_partition_numbers,
    bench_enumeration,
    bench_series,
    bench_sampling,
    bench_special
);
criterion_main!(benches);
