use criterion::{criterion_group, criterion_main, Criterion};

use bkdv_bench::{engine_p2, fo2};
use bkdv_core::correlators::{solve_genus0, Space};
use bkdv_core::hierarchy::FlowDensities;
use bkdv_core::iz_coords::{fo_to_iz, star_restrict};
use bkdv_core::jet_ring::{d_x, to_u_coords};
use bkdv_core::loop_solver::solve_up_to;

fn jets(c: &mut Criterion) {
    let f = fo2();
    c.bench_function("d_x F^o_2", |b| b.iter(|| d_x(&f)));
    c.bench_function("F^o_2 to u-coordinates", |b| b.iter(|| to_u_coords(&f)));
    let mut g = c.benchmark_group("IZ");
    g.sample_size(10);
    g.bench_function("F^o_2 to IZ and star", |b| b.iter(|| star_restrict(&fo_to_iz(&f).unwrap()).unwrap()));
    g.finish();
}

fn flows(c: &mut Criterion) {
    c.bench_function("flow densities n <= 4", |b| b.iter(|| FlowDensities::compute(4).unwrap()));
}

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("loop equation");
    g.sample_size(10);
    g.bench_function("solve p <= 1", |b| b.iter(|| solve_up_to(1).unwrap()));
    g.finish();
}

fn series(c: &mut Criterion) {
    let space = Space::full(2, 2, 6);
    c.bench_function("genus zero to degree 6", |b| b.iter(|| solve_genus0(&space).unwrap()));
    let mut g = c.benchmark_group("correlators");
    g.sample_size(10);
    g.bench_function("B~_{2;1,1,1} both routes, cold", |b| b.iter(|| engine_p2().btilde(2, &[2], &[1, 1, 1]).unwrap()));
    g.finish();
}

criterion_group!(benches, jets, flows, solver, series);
criterion_main!(benches);
