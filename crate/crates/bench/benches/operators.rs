use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wgraph_core::metric::DEFAULT_BUDGET;
use wgraph_core::*;

fn gauge_potential(c: &mut Criterion) {
    let s = gauge_to_schrodinger(&build_family(&FamilySpec::log()).unwrap());
    c.bench_function("log gauge potential, 10^4 vertices", |b| {
        b.iter(|| {
            let mut sum = 0.0;
            for n in 2..10_002u64 {
                sum += s.w(VertexId(n)).unwrap();
            }
            black_box(sum)
        })
    });
}

fn dirichlet(c: &mut Criterion) {
    let mut group = c.benchmark_group("dirichlet on a half-line segment");
    let s = gauge_to_schrodinger(&build_family(&FamilySpec::power(1.0, -2.0)).unwrap());
    // 400 vertices take the dense LU path, 3000 the conjugate gradient one
    for radius in [400usize, 3000] {
        let region = combinatorial_ball(s.graph(), VertexId(1), radius).unwrap();
        let p = DirichletProblem::constant_boundary(s.clone(), region, 1.0).unwrap();
        let opts = DirichletOptions {
            check_positivity: false,
            ..DirichletOptions::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(radius), &p, |b, p| {
            b.iter(|| solve_dirichlet(p, &opts).unwrap())
        });
    }
    group.finish();
}

fn metric(c: &mut Criterion) {
    let ctx = MetricContext::gauge(&build_family(&FamilySpec::power(1.0, 0.0)).unwrap());
    c.bench_function("delta_a over 10^4 steps", |b| {
        b.iter(|| delta_a(&ctx, VertexId(1), VertexId(10_001), DEFAULT_BUDGET).unwrap())
    });
    let tree = MetricContext::gauge(&build_family(&FamilySpec::binary_tree()).unwrap());
    c.bench_function("binary tree metric ball of radius 12", |b| {
        b.iter(|| metric_ball(&tree, VertexId(1), 12.0, DEFAULT_BUDGET).unwrap())
    });
}

criterion_group!(benches, gauge_potential, dirichlet, metric);
criterion_main!(benches);
