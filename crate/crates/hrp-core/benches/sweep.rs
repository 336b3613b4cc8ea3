//! Parallel vs sequential sweep throughput.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use hrp_core::allocator::ObjectiveKind;
use hrp_core::experiments::{sweep, sweep_seq, SweepAxis, SweepSpec};
use hrp_core::NetworkConfig;

fn bench_sweep(c: &mut Criterion) {
    let base = NetworkConfig {
        num_ues: 40,
        ..Default::default()
    };
    let spec = SweepSpec {
        axis: SweepAxis::NMax,
        values: vec![150_000.0, 200_000.0, 250_000.0],
        seeds: vec![1, 2, 3, 4],
        objectives: vec![ObjectiveKind::SumRate, ObjectiveKind::Proportional],
    };

    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| sweep(black_box(&spec), black_box(&base)).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| sweep_seq(black_box(&spec), black_box(&base)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);
