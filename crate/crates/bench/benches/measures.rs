use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use heom_bench::mixed_state;
use heom_core::measures::{
    coherence_length, concurrence, global_entanglement, von_neumann_entropy,
};

fn measures(c: &mut Criterion) {
    let rho = mixed_state();
    c.bench_function("von_neumann_entropy", |b| {
        b.iter(|| von_neumann_entropy(black_box(&rho)).unwrap())
    });
    c.bench_function("global_entanglement", |b| {
        b.iter(|| global_entanglement(black_box(&rho)).unwrap())
    });
    c.bench_function("coherence_length", |b| {
        b.iter(|| coherence_length(black_box(&rho)).unwrap())
    });
    c.bench_function("concurrence", |b| {
        b.iter(|| concurrence(black_box(&rho), 1, 2).unwrap())
    });
}

criterion_group!(benches, measures);
criterion_main!(benches);
