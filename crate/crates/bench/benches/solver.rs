use criterion::{black_box, criterion_group, criterion_main, Criterion};
use scvx_bench::{quadrotor, quadrotor_subproblem};
use scvx_core::examples::example1::initial_reference;
use scvx_core::examples::example1_problem;
use scvx_core::examples::quadrotor::discretize_dynamics;
use scvx_core::nalgebra::{SMatrix, Vector6};
use scvx_core::subproblem::{linearize, solve_subproblem};
use scvx_core::{solve, AlgorithmConfig, ClarabelBackend};

fn dynamics(c: &mut Criterion) {
    let (params, problem, z) = quadrotor();
    let x = Vector6::new(0.0, 2.3, -0.4, 0.3, 1.7, -0.6);
    let u = SMatrix::<f64, 4, 1>::new(3.1, 0.8, -0.5, 3.3);
    c.bench_function("discretize_dynamics", |b| {
        b.iter(|| discretize_dynamics(black_box(&x), black_box(&u), &params, params.dt(), params.substeps))
    });
    c.bench_function("linearize_quadrotor", |b| b.iter(|| linearize(&problem, black_box(&z))));
}

fn subproblem(c: &mut Criterion) {
    let sp = quadrotor_subproblem();
    let backend = ClarabelBackend::default();
    c.bench_function("solve_quadrotor_subproblem", |b| {
        b.iter(|| solve_subproblem(black_box(&sp), &backend))
    });
}

fn full_solves(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    let p1 = example1_problem();
    let z1 = initial_reference();
    let config = AlgorithmConfig::default();
    group.bench_function("example1", |b| b.iter(|| solve(&p1, &config, &z1)));
    let (_, p2, z2) = quadrotor();
    let config = AlgorithmConfig {
        w_init: 10.0,
        ..Default::default()
    };
    group.bench_function("example2", |b| b.iter(|| solve(&p2, &config, &z2)));
    group.finish();
}

criterion_group!(benches, dynamics, subproblem, full_solves);
criterion_main!(benches);
