//! Sweep throughput, dispatched map against the forced-sequential path.
//!
//! With the default `parallel` feature the dispatched functions fan out
//! over a thread pool; built with --no-default-features both sides run
//! sequentially and should coincide.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use higgsflow::scan::{case_rows, case_rows_sequential, stability_rows, SweepConfig};

fn case_sweep(c: &mut Criterion) {
    let cfg = SweepConfig {
        primes: vec![2, 3, 5, 7, 11, 13],
        genera: (2..=12).collect(),
    };
    let mut group = c.benchmark_group("case-sweep");
    group.bench_function("dispatched", |b| {
        b.iter(|| case_rows(black_box(&cfg)).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| case_rows_sequential(black_box(&cfg)).unwrap())
    });
    group.finish();
}

fn stability_sweep(c: &mut Criterion) {
    // each row builds the chain and runs the full stability proof
    let cfg = SweepConfig {
        primes: vec![2, 3, 5, 7],
        genera: (2..=8).collect(),
    };
    let mut group = c.benchmark_group("stability-sweep");
    group.sample_size(20);
    group.bench_function("dispatched", |b| {
        b.iter(|| stability_rows(black_box(&cfg)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, case_sweep, stability_sweep);
criterion_main!(benches);
