//! Criterion benches for the data-parallel kernels. Run with the default
//! features for the rayon path and with `--no-default-features` for the
//! sequential fallback; criterion's saved baselines make the two directly
//! comparable:
//!
//!   cargo bench -p haarconv -- --save-baseline parallel
//!   cargo bench -p haarconv --no-default-features -- --baseline parallel

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use haarconv::group::haar_rotations;
use haarconv::measure::{
    convolve_homog, energy_distance_test, energy_statistic, so3_convolve, Carrier, DenseMeasure,
    EmpiricalMeasure, EnergyTestConfig,
};
use haarconv::semigroup::HeatSemigroupSo3;
use haarconv::{CosetSpace, Subgroup};

fn bench_haar_sampling(c: &mut Criterion) {
    c.bench_function("haar_rotations_100k", |b| {
        b.iter(|| black_box(haar_rotations(100_000, 7)))
    });
}

fn bench_heat_sampling(c: &mut Criterion) {
    let heat = HeatSemigroupSo3::default();
    c.bench_function("heat_sample_t0.5_10k", |b| {
        b.iter(|| black_box(heat.sample(0.5, 10_000, 7).unwrap()))
    });
}

fn bench_empirical_convolution(c: &mut Criterion) {
    let a = EmpiricalMeasure::from_points(haar_rotations(10_000, 1), 1).unwrap();
    let bm = EmpiricalMeasure::from_points(haar_rotations(10_000, 2), 2).unwrap();
    c.bench_function("so3_convolve_10k", |b| {
        b.iter(|| black_box(so3_convolve(&a, &bm, 10_000, 3).unwrap()))
    });
}

fn bench_energy(c: &mut Criterion) {
    let a = EmpiricalMeasure::from_points(haar_rotations(2048, 11), 11).unwrap();
    let bm = EmpiricalMeasure::from_points(haar_rotations(2048, 12), 12).unwrap();
    let pa: Vec<_> = a.points().cloned().collect();
    let pb: Vec<_> = bm.points().cloned().collect();
    c.bench_function("energy_statistic_2048", |b| {
        b.iter(|| black_box(energy_statistic(&pa, &pb)))
    });
    c.bench_function("energy_permutation_test_10k", |b| {
        b.iter(|| {
            black_box(energy_distance_test(&a, &bm, &EnergyTestConfig::default(), 5).unwrap())
        })
    });
}

fn bench_dense_convolution(c: &mut Criterion) {
    let s4 = haarconv::group::group_by_name("S4").unwrap();
    let k = Subgroup::new(s4.clone(), &[0, s4.elem_by_name("(12)").unwrap()]).unwrap();
    let space = CosetSpace::new(k).unwrap();
    let carrier = Carrier::Space(space.clone());
    let a = DenseMeasure::random(carrier.clone(), 1);
    let b2 = DenseMeasure::random(carrier, 2);
    let section = space.section();
    c.bench_function("convolve_homog_s4", |b| {
        b.iter(|| black_box(convolve_homog(&a, &b2, &section).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_haar_sampling,
    bench_heat_sampling,
    bench_empirical_convolution,
    bench_energy,
    bench_dense_convolution
);
criterion_main!(benches);
