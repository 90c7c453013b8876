use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use custody_core::analytics::{max_block_size_closed_form, table2, UkpSolver};
use custody_core::{Catalog, SimTime, HEADER_SIZE};

fn knapsack(c: &mut Criterion) {
    let catalog = Catalog::default();
    let mut g = c.benchmark_group("ukp");
    g.sample_size(10);
    g.bench_function("build_1e7", |b| b.iter(|| UkpSolver::new(&catalog, black_box(10_000_000)).unwrap()));
    let solver = UkpSolver::new(&catalog, 10_000_000).unwrap();
    g.bench_function("query", |b| b.iter(|| solver.max_content(black_box(7_654_321)).unwrap()));
    g.bench_function("closed_form", |b| {
        b.iter(|| max_block_size_closed_form(black_box(7_654_321), &catalog, HEADER_SIZE))
    });
    g.finish();
}

fn growth(c: &mut Criterion) {
    c.bench_function("table2", |b| b.iter(|| table2(black_box(SimTime::from_secs(300)))));
}

criterion_group!(benches, knapsack, growth);
criterion_main!(benches);
