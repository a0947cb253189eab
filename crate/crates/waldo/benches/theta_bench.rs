//! Benchmarks the lattice-point enumerators: the data-parallel default
//! against the always-available sequential fallback, on forms drawn from
//! the shipped level-576 combination.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use waldo::fixtures::{default_dir, FixtureSet};
use waldo::thetaforms::{repcount, repcount_serial, TernaryForm};

fn bench_forms() -> Vec<TernaryForm> {
    let set = FixtureSet::load(&default_dir()).expect("fixtures");
    let combo = set.combo("quad576").expect("quad576 combo");
    // one diagonal, one with cross terms, one with a large leading coefficient
    [0usize, 12, 16]
        .iter()
        .map(|&i| combo.terms[i].1)
        .collect()
}

fn repcount_benches(c: &mut Criterion) {
    let forms = bench_forms();
    let mut group = c.benchmark_group("repcount");
    for limit in [5_000u64, 20_000] {
        for (i, q) in forms.iter().enumerate() {
            group.bench_with_input(
                BenchmarkId::new(format!("parallel/form{i}"), limit),
                &limit,
                |b, &limit| b.iter(|| repcount(q, limit).unwrap()),
            );
            group.bench_with_input(
                BenchmarkId::new(format!("serial/form{i}"), limit),
                &limit,
                |b, &limit| b.iter(|| repcount_serial(q, limit).unwrap()),
            );
        }
    }
    group.finish();
}

criterion_group!(benches, repcount_benches);
criterion_main!(benches);
