//! Grid-refinement behavior: quadrature error against closed forms, the
//! semigroup identity, annihilation residuals, and solver residual trends.

use std::sync::Arc;

use phihilfer::{
    boundary_check, frac_integral, frac_integral_sweep, frac_integral_weighted,
    hilfer_annihilation_check, picard_solve, powerlaw_oracle, BoundaryTerm, Expr, GridFunction,
    PhiFunction, PhiGrid, ProblemSpec, SolverConfig,
};

fn unit_grid(phi: &PhiFunction, n: usize) -> Arc<PhiGrid> {
    PhiGrid::build(phi, 0.0, 1.0, n, 2.0, &[]).unwrap()
}

fn powerlaw_error(phi: &PhiFunction, mu: f64, delta: f64, n: usize) -> f64 {
    let grid = unit_grid(phi, n);
    let oracle = powerlaw_oracle(mu, delta, phi, 0.0, 1.0).unwrap();
    let got = if delta >= 1.0 {
        let h = GridFunction::plain(
            Arc::clone(&grid),
            (0..grid.len())
                .map(|k| grid.phi_dist(k).powf(delta - 1.0))
                .collect(),
        )
        .unwrap();
        frac_integral(&h, mu, grid.len() - 1).unwrap()
    } else {
        let xi = delta + 1.0;
        let hw = GridFunction::weighted(Arc::clone(&grid), vec![1.0; grid.len()], xi).unwrap();
        frac_integral_weighted(&hw, xi, mu, grid.len() - 1).unwrap()
    };
    (got - oracle).abs()
}

#[test]
fn powerlaw_convergence_order_at_least_three_halves() {
    // empirical order on the default graded grid, doubling N
    let phi = PhiFunction::identity();
    for delta in [0.5, 1.3] {
        let mut errors = Vec::new();
        for n in [256usize, 512, 1024, 2048] {
            errors.push(powerlaw_error(&phi, 1.5, delta, n));
        }
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                order >= 1.5,
                "delta={delta}: observed order {order} below 1.5 (errors {errors:?})"
            );
        }
    }
    // delta = 1 is exact up to roundoff
    assert!(powerlaw_error(&phi, 1.5, 1.0, 256) < 1e-14);
}

#[test]
fn semigroup_identity_matrix() {
    // I^{m1} I^{m2} [1] = I^{m1+m2} [1] to 1e-5 relative at N = 1024
    let phi = PhiFunction::identity();
    let grid = unit_grid(&phi, 1024);
    let ones = GridFunction::plain(Arc::clone(&grid), vec![1.0; grid.len()]).unwrap();
    for m1 in [0.5, 1.5] {
        for m2 in [0.5, 1.5] {
            let inner = frac_integral_sweep(&ones, m2).unwrap();
            let inner_fn = GridFunction::plain(Arc::clone(&grid), inner).unwrap();
            let nested = frac_integral(&inner_fn, m1, grid.len() - 1).unwrap();
            let direct = powerlaw_oracle(m1 + m2, 1.0, &phi, 0.0, 1.0).unwrap();
            let rel = (nested - direct).abs() / direct.abs();
            assert!(rel <= 1e-5, "({m1},{m2}): relative error {rel}");
        }
    }
}

#[test]
fn annihilation_residual_shrinks_with_refinement() {
    let id = PhiFunction::identity();
    let log = PhiFunction::log_shift(0.0);
    let coarse = hilfer_annihilation_check(1.5, &unit_grid(&id, 256)).unwrap();
    let fine = hilfer_annihilation_check(1.5, &unit_grid(&id, 1024)).unwrap();
    assert!(fine < coarse);
    assert!(fine <= 1e-6);
    let log_fine = hilfer_annihilation_check(1.5, &unit_grid(&log, 2048)).unwrap();
    assert!(log_fine <= 1e-6);
}

fn constant_forcing_spec() -> ProblemSpec {
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
        Expr::parse("1", &["t", "y", "d"]).unwrap(),
        0.1,
        0.1,
    )
    .unwrap()
}

#[test]
fn boundary_residuals_trend_down_with_refinement() {
    // the constant-forcing problem has a nontrivial trajectory, so its
    // boundary residuals expose the quadrature consistency error
    let spec = constant_forcing_spec();
    let mut lefts = Vec::new();
    let mut rights = Vec::new();
    for n in [128usize, 256, 512, 1024, 2048] {
        let cfg = SolverConfig {
            grid_size: n,
            ..SolverConfig::default()
        };
        let sol = picard_solve(&spec, &cfg).unwrap();
        assert!(sol.converged);
        let (l, r) = boundary_check(&spec, &sol).unwrap();
        lefts.push(l);
        rights.push(r);
    }
    for w in rights.windows(2) {
        assert!(w[1] < w[0], "right residuals not decreasing: {rights:?}");
    }
    for w in lefts.windows(2) {
        assert!(w[1] < w[0], "left residuals not decreasing: {lefts:?}");
    }
    assert!(rights[3] <= 1e-6, "right residual at N=1024: {}", rights[3]);
    assert!(lefts[3] <= 1e-6, "left residual at N=1024: {}", lefts[3]);
}
