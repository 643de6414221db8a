use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use baseshift_bench::wide_input;
use baseshift_core::config::Mode;
use baseshift_core::{digitmap, identities, periodicity, pte};

fn bench_digitmap(c: &mut Criterion) {
    let n = wide_input();
    c.bench_function("base_shift/256-bit base 3 to 7", |b| {
        b.iter(|| digitmap::base_shift(black_box(&n), 3, 7).unwrap())
    });
    c.bench_function("residue/256-bit base 3 to 7", |b| {
        b.iter(|| digitmap::residue(black_box(&n), 3, 7).unwrap())
    });
}

fn bench_periods(c: &mut Criterion) {
    c.bench_function("minimal_period/(16,2)", |b| {
        b.iter(|| periodicity::minimal_period(black_box(16), black_box(2)).unwrap())
    });
    c.bench_function("minimal_period/(64,2)", |b| {
        b.iter(|| periodicity::minimal_period(black_box(64), black_box(2)).unwrap())
    });
}

fn bench_identities(c: &mut Criterion) {
    c.bench_function("beta by division/(p=2, M=6, N=5)", |b| {
        b.iter(|| identities::beta(black_box(2), 6, 5).unwrap())
    });
    c.bench_function("beta by convolution/(p=2, M=6, N=5)", |b| {
        b.iter(|| identities::beta_by_convolution(black_box(2), 6, 5).unwrap())
    });
    c.bench_function("second closed form/(p=(1,1), M=4, N=3)", |b| {
        b.iter(|| {
            identities::check_second_closed_form(black_box(&[1, 1]), 4, 3, Mode::Symbolic)
                .unwrap()
        })
    });
}

fn bench_pte(c: &mut Criterion) {
    c.bench_function("pte certify/(M=8, N=3, p=2)", |b| {
        b.iter(|| {
            let sol = pte::build_partition(black_box(8), 3, 2).unwrap();
            pte::certify(sol, 2).unwrap()
        })
    });
}

criterion_group!(benches, bench_digitmap, bench_periods, bench_identities, bench_pte);
criterion_main!(benches);
