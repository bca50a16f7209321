use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use kinklab_bench::{kink_of, phi4_operator, phi6_state, phi8_transformed};
use kinklab_core::{
    build_kink, classify, eigen_lowest, modulate, step, threshold_scan, ClassifyOptions, Family,
    KinkGrid, PairSelector, ParamFamily,
};

fn criterion_kernels(c: &mut Criterion) {
    let tp = phi8_transformed();
    let opts = ClassifyOptions::default();
    c.bench_function("classify phi8 m=1.5 (-1,1)", |b| {
        b.iter(|| classify(black_box(&tp), &opts).unwrap())
    });
    c.bench_function("threshold_scan phi8 (1,m)", |b| {
        b.iter(|| {
            threshold_scan(
                ParamFamily::Phi8,
                (1.1, 4.0),
                PairSelector::StartingAt(1.0),
                1e-7,
                &opts,
            )
            .unwrap()
        })
    });
}

fn kink_kernels(c: &mut Criterion) {
    let (p, pair) = kink_of(Family::Phi6, 0.0, 1.0);
    c.bench_function("build_kink phi6 dx=0.01", |b| {
        b.iter(|| build_kink(black_box(&p), &pair, KinkGrid::new(0.01)).unwrap())
    });
}

fn spectral_kernels(c: &mut Criterion) {
    let op = phi4_operator(0.005);
    c.bench_function("eigen_lowest phi4 L dx=0.005 k=4", |b| {
        b.iter(|| eigen_lowest(black_box(&op), 4).unwrap())
    });
}

fn dynamics_kernels(c: &mut Criterion) {
    let (state, profile) = phi6_state();
    let mut s = state.clone();
    c.bench_function("verlet step phi6 dx=0.02", |b| {
        b.iter(|| step(black_box(&mut s), 0.01).unwrap())
    });
    c.bench_function("modulate phi6 warm start", |b| {
        b.iter(|| modulate(black_box(&state), &profile, (0.0, 0.0)).unwrap())
    });
}

criterion_group!(
    benches,
    criterion_kernels,
    kink_kernels,
    spectral_kernels,
    dynamics_kernels
);
criterion_main!(benches);
