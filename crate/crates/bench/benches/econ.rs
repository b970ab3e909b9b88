use std::hint::black_box;

use callvoice::econ::{fama_macbeth, monthly_ic, quintile_sort, spearman, GroupBy, MIN_MONTHLY_OBS};
use callvoice_bench::{pairs, panel};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn bench_spearman(c: &mut Criterion) {
    let mut group = c.benchmark_group("spearman");
    for n in [50, 500, 5_000] {
        let (x, y) = pairs(n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| spearman(black_box(&x), black_box(&y))));
    }
    group.finish();
}

fn bench_panel_tests(c: &mut Criterion) {
    let p = panel(117, 140);
    let mut group = c.benchmark_group("panel_117x140");
    group.sample_size(20);
    group.bench_function("monthly_ic", |b| b.iter(|| monthly_ic(black_box(&p), "m4", 1, MIN_MONTHLY_OBS)));
    group.bench_function("fama_macbeth", |b| b.iter(|| fama_macbeth(black_box(&p), &["m4", "sue"], 1)));
    group.bench_function("quintile_sort", |b| b.iter(|| quintile_sort(black_box(&p), "m4", 1, GroupBy::Pooled)));
    group.finish();
}

criterion_group!(benches, bench_spearman, bench_panel_tests);
criterion_main!(benches);
