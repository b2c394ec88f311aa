use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qhe_core::synth::{
    approximate_unitary, enumerate_states, ry_unitary, shared_table, SynthTable,
};

fn table_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("table_build");
    group.sample_size(10);
    for budget in [3, 5, 7] {
        group.bench_with_input(BenchmarkId::from_parameter(budget), &budget, |b, &k| {
            b.iter(|| SynthTable::build(black_box(k)).unwrap())
        });
    }
    group.finish();
}

fn approximate(c: &mut Criterion) {
    shared_table();
    let target = ry_unitary((-28.67f64).to_radians());
    let mut group = c.benchmark_group("approximate_ry");
    for budget in [1, 4, 7] {
        group.bench_with_input(BenchmarkId::from_parameter(budget), &budget, |b, &k| {
            b.iter(|| approximate_unitary(black_box(&target), k).unwrap())
        });
    }
    group.finish();
}

fn coverage(c: &mut Criterion) {
    shared_table();
    c.bench_function("enumerate_states_7", |b| {
        b.iter(|| enumerate_states(black_box(7)).unwrap())
    });
}

criterion_group!(benches, table_build, approximate, coverage);
criterion_main!(benches);
