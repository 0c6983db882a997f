//! Trajectory propagation and equilibrium machinery.

use annulus_bench::{reference_annulus, reference_stack};
use annulus_core::dynamics::{
    axial_period, cartesian_rhs, integrate, CartesianState, IntegrationOptions,
};
use annulus_core::equilibria::{find_planar_critical_points, hessian_fd, origin_spectrum};
use annulus_core::FieldPoint;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn bench_dynamics(c: &mut Criterion) {
    let stack = reference_stack();
    let ann = reference_annulus();
    let state = CartesianState::new(3.0, 0.0, 0.3, 0.0, 0.6, 0.1);
    let mut g = c.benchmark_group("dynamics");
    g.bench_function("cartesian_rhs", |b| {
        b.iter(|| cartesian_rhs(&stack, black_box(&state)).unwrap())
    });
    g.bench_function("hessian_fd", |b| {
        b.iter(|| hessian_fd(&stack, black_box(&FieldPoint::new(3.0, 0.0, 0.3))).unwrap())
    });
    g.bench_function("axial_period", |b| {
        b.iter(|| axial_period(&ann, black_box(-0.8)).unwrap())
    });
    g.sample_size(20);
    g.bench_function("orbit_100_time_units", |b| {
        b.iter(|| {
            integrate(
                &stack,
                black_box(state),
                100.0,
                &IntegrationOptions::default(),
            )
            .unwrap()
        })
    });
    g.finish();
}

fn bench_equilibria(c: &mut Criterion) {
    let stack = reference_stack();
    let ann = reference_annulus();
    let mut g = c.benchmark_group("equilibria");
    g.sample_size(20);
    g.bench_function("critical_point_census", |b| {
        b.iter(|| find_planar_critical_points(&stack, black_box(2.5), 100.0).unwrap())
    });
    g.bench_function("origin_spectrum", |b| {
        b.iter(|| origin_spectrum(black_box(&ann)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_dynamics, bench_equilibria);
criterion_main!(benches);
