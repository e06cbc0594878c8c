//! Compares the rayon data-parallel paths against the sequential
//! reference paths for dataset generation and class statistics.
//!
//! Run with the default features to exercise both sides:
//!   cargo bench -p morsekit

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use morsekit::generator::{generate_dataset, generate_dataset_serial, GenerationConfig};
use morsekit::metrics::{class_statistics, class_statistics_serial};

fn bench_generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate_dataset");
    for per_class in [50usize, 200] {
        let cfg = GenerationConfig {
            per_class,
            master_seed: 42,
            noise_sigma: 2.0,
            ..GenerationConfig::baseline()
        };
        group.bench_with_input(BenchmarkId::new("parallel", per_class), &cfg, |b, cfg| {
            b.iter(|| generate_dataset(black_box(cfg)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("serial", per_class), &cfg, |b, cfg| {
            b.iter(|| generate_dataset_serial(black_box(cfg)).unwrap())
        });
    }
    group.finish();
}

fn bench_class_statistics(c: &mut Criterion) {
    let cfg = GenerationConfig {
        per_class: 500,
        master_seed: 42,
        noise_sigma: 2.0,
        ..GenerationConfig::baseline()
    };
    let dataset = generate_dataset(&cfg).unwrap();
    let mut group = c.benchmark_group("class_statistics");
    group.bench_function("parallel", |b| {
        b.iter(|| class_statistics(black_box(&dataset)).unwrap())
    });
    group.bench_function("serial", |b| {
        b.iter(|| class_statistics_serial(black_box(&dataset)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_generation, bench_class_statistics);
criterion_main!(benches);
