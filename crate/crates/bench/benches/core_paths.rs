//! Hot paths, smallest-to-largest: one extended-precision power, one
//! defect evaluation, a full residual scan, a certification run, and a
//! family certification. Grid sizes are scaled down from the CLI defaults
//! so a full pass stays in seconds.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use infostab::{
    certify, certify_family, defect, make_canonical_family, make_exact_power, noise_residual_bound,
    perturb, residual_sup, Alpha, Dd, DomainGrid, FamilyParams, NoiseKind, PerturbationPlan,
};

fn al(v: f64) -> Alpha {
    Alpha::new(v).unwrap()
}

fn bench_dd_pow(c: &mut Criterion) {
    let x = Dd::from_f64(0.37);
    c.bench_function("dd_pow", |b| b.iter(|| black_box(x).pow(black_box(-1.3))));
}

fn bench_defect_point(c: &mut Criterion) {
    let spec = make_exact_power(2.0, -1.0, al(-1.0)).unwrap();
    c.bench_function("defect_point", |b| {
        b.iter(|| defect(black_box(&spec), al(-1.0), black_box(0.3), black_box(0.4)).unwrap())
    });
}

fn bench_residual_scan(c: &mut Criterion) {
    let spec = make_exact_power(2.0, -1.0, al(-1.0)).unwrap();
    let grid = DomainGrid::new(1e-2, 60).unwrap();
    c.bench_function("residual_sup_60", |b| {
        b.iter(|| residual_sup(black_box(&spec), al(-1.0), &grid).unwrap())
    });
}

fn bench_certify(c: &mut Criterion) {
    let plan = PerturbationPlan::new(1e-3, 11, NoiseKind::Comb).unwrap();
    let spec = perturb(make_exact_power(2.0, -1.0, al(-1.0)).unwrap(), plan);
    let grid = DomainGrid::new(1e-2, 60).unwrap();
    let eps = noise_residual_bound(1e-3, al(-1.0), &grid).unwrap();
    c.bench_function("certify_noisy_60", |b| {
        b.iter(|| certify(black_box(&spec), al(-1.0), &grid, eps.clone()).unwrap())
    });
}

fn bench_certify_family(c: &mut Criterion) {
    let fam =
        make_canonical_family(FamilyParams::PowerFamily { c: 1.3, d: -0.4 }, al(-1.0), 5).unwrap();
    c.bench_function("certify_family_n5", |b| {
        b.iter(|| certify_family(black_box(&fam), al(-1.0), 5, 10, 7, 0.05).unwrap())
    });
}

criterion_group!(
    benches,
    bench_dd_pow,
    bench_defect_point,
    bench_residual_scan,
    bench_certify,
    bench_certify_family
);
criterion_main!(benches);
