use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use mds_screen_bench::{normal_series, point_curve_panel, rng};
use mds_screen_core::metric::MetricSample;
use mds_screen_core::screen::{build_partition, mds_score, score_all_assets};

fn bench_partition(c: &mut Criterion) {
    let mut r = rng(1);
    let y = normal_series(&mut r, 2000);
    c.bench_function("build_partition_n2000_m8", |b| {
        b.iter(|| build_partition(black_box(&y), 8).unwrap())
    });
}

fn bench_scalar_score(c: &mut Criterion) {
    let mut r = rng(2);
    let y = normal_series(&mut r, 2000);
    let x: Vec<f64> = y
        .iter()
        .map(|v| 0.7 * v + normal_series(&mut r, 1)[0])
        .collect();
    let part = build_partition(&y, 8).unwrap();
    let sample = MetricSample::new(x).unwrap();
    c.bench_function("mds_score_scalar_n2000", |b| {
        b.iter(|| mds_score(black_box(&sample), black_box(&part)).unwrap())
    });
}

fn bench_panel_score(c: &mut Criterion) {
    // One backtest window: 100 assets, 126 days, 48-point volatility grids.
    let mut r = rng(3);
    let panel = point_curve_panel(&mut r, 100, 126, 48);
    let y = normal_series(&mut r, 126);
    let part = build_partition(&y, 8).unwrap();
    c.bench_function("score_all_assets_100x126_grid48", |b| {
        b.iter(|| score_all_assets(black_box(&panel), black_box(&part)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_partition,
    bench_scalar_score,
    bench_panel_score
);
criterion_main!(benches);
