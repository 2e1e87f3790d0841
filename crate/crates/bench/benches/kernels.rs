use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use spacelike::barrier::{build_barrier_prod0, ComparisonModel};
use spacelike::elliptic::{newton_solve, NewtonOptions};
use spacelike::estimates::lambda1_estimate;
use spacelike::graph::solve_radial_graph;
use spacelike::tensor::pseudo_jacobi_gap;
use spacelike::{Anchor, Grid, MeanCurvSpec};
use spacelike_bench::{catenoid_problem, grad_hess_samples, hyperbolic};

fn graph_solve(c: &mut Criterion) {
    let model = hyperbolic(2);
    let grid = Grid::uniform(0.0, 12.0, 1201).unwrap();
    let spec = MeanCurvSpec::radial(|_| 0.5);
    c.bench_function("solve_radial_graph/hyperbolic-1201", |b| {
        b.iter(|| solve_radial_graph(&model, &spec, Anchor::PoleRegular { tau0: 0.0 }, black_box(&grid)).unwrap())
    });
}

fn barrier_build(c: &mut Criterion) {
    let cmp = ComparisonModel::Constant { g0: 1.0 };
    c.bench_function("build_barrier_prod0/2000", |b| {
        b.iter(|| build_barrier_prod0(2, &cmp, 1.0, 2.0, black_box(0.5), &|_| 1.0, 30.0, 2000).unwrap())
    });
}

fn newton(c: &mut Criterion) {
    let problem = catenoid_problem(400);
    let opts = NewtonOptions::default();
    c.bench_function("newton_solve/catenoid-400", |b| b.iter(|| newton_solve(black_box(&problem), &opts).unwrap()));
}

fn lambda1(c: &mut Criterion) {
    let model = hyperbolic(2);
    c.bench_function("lambda1_estimate/r20-800", |b| {
        b.iter(|| lambda1_estimate(&model, black_box(20.0), 800).unwrap())
    });
}

fn pseudo_jacobi(c: &mut Criterion) {
    let samples = grad_hess_samples(4, 1000);
    c.bench_function("pseudo_jacobi_gap/m4-x1000", |b| {
        b.iter(|| samples.iter().map(|p| pseudo_jacobi_gap(p).unwrap()).fold(f64::INFINITY, f64::min))
    });
}

criterion_group!(benches, graph_solve, barrier_build, newton, lambda1, pseudo_jacobi);
criterion_main!(benches);
