use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use lpb_bench::electorate;
use lpb_core::diagnostics::shuffle_baseline;
use lpb_core::lpb::pool_lpb;
use lpb_core::pools::partition_pools;
use lpb_core::regression::{build_series, ols_fit, Side, XKind};
use lpb_core::DEFAULT_THRESHOLD;

fn fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("ols_fit");
    for n in [1_000, 10_000] {
        let part = partition_pools(&electorate(n, 3));
        let series = build_series(&part.blue_pool, DEFAULT_THRESHOLD, Side::Red, XKind::Size).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &series, |b, s| b.iter(|| ols_fit(black_box(s))));
    }
    group.finish();
}

fn pools_and_lpb(c: &mut Criterion) {
    let mut group = c.benchmark_group("partition_and_lpb");
    for n in [1_000, 10_000] {
        let records = electorate(n, 5);
        group.bench_with_input(BenchmarkId::from_parameter(n), &records, |b, recs| {
            b.iter(|| {
                let part = partition_pools(black_box(recs));
                let blue = pool_lpb(&part.blue_pool, DEFAULT_THRESHOLD, part.scope_total_votes, 0.05);
                let red = pool_lpb(&part.red_pool, DEFAULT_THRESHOLD, part.scope_total_votes, 0.05);
                (blue, red)
            })
        });
    }
    group.finish();
}

fn shuffles(c: &mut Criterion) {
    let part = partition_pools(&electorate(4_000, 9));
    let mut group = c.benchmark_group("shuffle_baseline");
    group.sample_size(10);
    group.bench_function("100 seeds", |b| b.iter(|| shuffle_baseline(black_box(&part.blue_pool), 100, 0)));
    group.finish();
}

criterion_group!(benches, fit, pools_and_lpb, shuffles);
criterion_main!(benches);
