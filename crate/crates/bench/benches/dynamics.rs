use std::hint::black_box;

use casimir_bench::{busy_state, params_until};
use casimir_core::dynamics::{integrate, rhs, rk4_step};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn derivative(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    for n_dark in [0, 50, 500] {
        let p = casimir_core::Params {
            n_dark,
            ..params_until(1000.0)
        };
        let s = busy_state(&p);
        group.bench_with_input(BenchmarkId::from_parameter(n_dark), &s, |b, s| {
            b.iter(|| rhs(black_box(s), &p, s.t).unwrap())
        });
    }
    group.finish();
}

fn step(c: &mut Criterion) {
    let p = params_until(1000.0);
    let s = busy_state(&p);
    c.bench_function("rk4_step/500", |b| {
        b.iter(|| rk4_step(black_box(&s), &p, p.dt).unwrap())
    });
}

fn short_run(c: &mut Criterion) {
    // 2000 steps through the pulse
    let p = params_until(1000.0);
    let mut group = c.benchmark_group("integrate");
    group.sample_size(10);
    group.bench_function("1000au", |b| b.iter(|| integrate(black_box(&p)).unwrap()));
    group.finish();
}

criterion_group!(benches, derivative, step, short_run);
criterion_main!(benches);
