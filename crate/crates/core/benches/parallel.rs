//! Compare the rayon-parallel suite runner against the sequential fallback,
//! plus the underlying batch kernels.

use criterion::{criterion_group, criterion_main, Criterion};

use ksw_core::par::Parallelism;
use ksw_core::quadspace::QuadSpace;
use ksw_core::reptheory::doubling_check;
use ksw_core::scalars::NumberField;
use ksw_core::suite::run_suite;

fn bench_suite_modes(c: &mut Criterion) {
    let mut group = c.benchmark_group("suite-forms");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| run_suite("forms", 0, Parallelism::Sequential).unwrap())
    });
    group.bench_function("parallel", |b| {
        b.iter(|| run_suite("forms", 0, Parallelism::Rayon).unwrap())
    });
    group.finish();

    let mut group = c.benchmark_group("suite-norm");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| run_suite("norm", 0, Parallelism::Sequential).unwrap())
    });
    group.bench_function("parallel", |b| {
        b.iter(|| run_suite("norm", 0, Parallelism::Rayon).unwrap())
    });
    group.finish();
}

fn bench_doubling_kernel(c: &mut Criterion) {
    let f = NumberField::quadratic("s2", 2);
    let u = QuadSpace::diagonal(f.clone(), vec![f.one()]).unwrap();
    let mut group = c.benchmark_group("doubling-quadratic");
    group.sample_size(10);
    group.bench_function("rank1-sqrt2", |b| b.iter(|| doubling_check(&u).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_suite_modes, bench_doubling_kernel);
criterion_main!(benches);
