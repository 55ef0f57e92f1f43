//! Benchmarks for the data-parallel hot paths against their sequential
//! twins: full-grid fractional-integral sweeps and a complete solve.
//!
//! With the default `parallel` feature the `par` variants run on rayon; the
//! `seq` variants always run single-threaded, so one run shows the speedup.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use phihilfer::{
    frac_integral_sweep, frac_integral_sweep_seq, picard_solve, BoundaryTerm, Expr, GridFunction,
    PhiFunction, PhiGrid, ProblemSpec, SolverConfig,
};

fn reference_problem() -> ProblemSpec {
    let k = 1.0 / (10.0 * std::f64::consts::E);
    ProblemSpec::new(
        1.5,
        1.0,
        PhiFunction::identity(),
        0.0,
        1.0,
        vec![
            BoundaryTerm {
                lambda: 10.0 / 7.0,
                delta: 4.0 / 5.0,
                tau: 1.0 / 3.0,
            },
            BoundaryTerm {
                lambda: 13.0 / 6.0,
                delta: 8.0 / 3.0,
                tau: 0.5,
            },
        ],
        Expr::parse("cos(t)/(10*e^(t+1)) * (sin(y) + d)", &["t", "y", "d"]).unwrap(),
        k,
        k,
    )
    .unwrap()
}

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("frac_integral_sweep");
    for n in [256usize, 1024, 2048] {
        let grid = PhiGrid::build(&PhiFunction::identity(), 0.0, 1.0, n, 2.0, &[]).unwrap();
        let h = GridFunction::plain(
            Arc::clone(&grid),
            grid.nodes().iter().map(|t| (3.0 * t).sin() + 1.0).collect(),
        )
        .unwrap();
        group.bench_with_input(BenchmarkId::new("par", n), &h, |b, h| {
            b.iter(|| frac_integral_sweep(h, 1.5).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("seq", n), &h, |b, h| {
            b.iter(|| frac_integral_sweep_seq(h, 1.5).unwrap())
        });
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    // the perturbed problem has a nontrivial fixed point, so the solve runs
    // several full outer iterations
    let spec = reference_problem().with_cosine_perturbation(0.01).unwrap();
    let mut group = c.benchmark_group("picard_solve");
    group.sample_size(10);
    for n in [256usize, 1024] {
        let cfg = SolverConfig {
            grid_size: n,
            ..SolverConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(n), &cfg, |b, cfg| {
            b.iter(|| picard_solve(&spec, cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_solve);
criterion_main!(benches);
