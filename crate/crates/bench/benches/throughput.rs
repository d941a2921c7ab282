use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use ordent_bench::logistic_orbit;
use ordent_core::entropy::{entropy_rate_table, ks_table, TableParams};
use ordent_core::partition::{k_blocks, symbolize};
use ordent_core::{ObservableSpec, SystemSpec};

fn bench_symbolize(c: &mut Criterion) {
    let xs = logistic_orbit(100_000, 1);
    let mut group = c.benchmark_group("symbolize");
    group.throughput(Throughput::Elements(xs.len() as u64));
    for d in [3usize, 6, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| b.iter(|| symbolize(black_box(&xs), d).unwrap()));
    }
    group.finish();
}

fn bench_blocks(c: &mut Criterion) {
    let s = symbolize(&logistic_orbit(100_000, 2), 5).unwrap();
    let mut group = c.benchmark_group("k_blocks");
    group.throughput(Throughput::Elements(s.len() as u64));
    for k in [1usize, 4] {
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| b.iter(|| k_blocks(black_box(&s), k).unwrap()));
    }
    group.finish();
    c.bench_function("entropy_rate_table/d5_k8", |b| b.iter(|| entropy_rate_table(black_box(&s), 8).unwrap()));
}

fn bench_table(c: &mut Criterion) {
    let mut group = c.benchmark_group("ks_table");
    group.sample_size(10);
    let params = TableParams::new(5, 6, 100_000, 3);
    group.bench_function("logistic4_d5_k6_1e5", |b| {
        b.iter(|| ks_table(&SystemSpec::Logistic { r: 4.0 }, &ObservableSpec::Identity, black_box(&params)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_symbolize, bench_blocks, bench_table);
criterion_main!(benches);
