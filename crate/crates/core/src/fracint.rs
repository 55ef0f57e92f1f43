//! Discretized fractional integral with respect to `phi` and its closed-form
//! power-law oracle.
//!
//! The operator is
//!
//! ```text
//! I^{mu} h(t) = (1/Gamma(mu)) * int_a^t phi'(s) (phi(t) - phi(s))^(mu-1) h(s) ds
//! ```
//!
//! computed by product integration in the transformed variable `u = phi(s)`:
//! on each panel the integrand factor carrying the singularity is kept
//! analytic and integrated exactly against the linear interpolant of the
//! remaining factor. Two singular endpoints occur: the kernel at `s = t` and,
//! for weighted integrands, the factor `(phi(s) - phi(a))^(xi-2)` at `s = a`.
//! [`frac_integral`] handles the kernel exactly on every panel;
//! [`frac_integral_weighted`] additionally treats the left-endpoint weight by
//! exact moments on panels near `a` (and by exact Beta moments when a single
//! panel carries both singularities).

use std::sync::Arc;

use thiserror::Error;

use crate::grid::{GridError, GridFunction, PhiFunction, PhiGrid, Representation};
use crate::par;
use crate::special::{gamma, gamma_unchecked, ln_gamma, SpecialFnError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracIntError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("representation error: {0}")]
    Representation(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
}

fn check_order(mu: f64) -> Result<(), FracIntError> {
    if !mu.is_finite() || mu <= 0.0 {
        return Err(FracIntError::Domain(format!(
            "fractional order must be positive, got {mu}"
        )));
    }
    Ok(())
}

fn check_xi(xi: f64) -> Result<(), FracIntError> {
    if !(xi > 1.0 && xi <= 2.0) {
        return Err(FracIntError::Domain(format!(
            "weight exponent requires 1 < xi <= 2, got {xi}"
        )));
    }
    Ok(())
}

/// Exact integral of `(v - u)^(mu-1) * (A + B (u - p))` over one panel
/// `[p, q]` with `q <= v`. `W1 = v - p`, `W0 = v - q`.
#[inline]
fn kernel_panel(mu: f64, v: f64, p: f64, q: f64, a_coef: f64, b_coef: f64) -> f64 {
    let w1 = v - p;
    let w0 = v - q;
    let d1 = (w1.powf(mu) - w0.powf(mu)) / mu;
    let d2 = (w1.powf(mu + 1.0) - w0.powf(mu + 1.0)) / (mu + 1.0);
    a_coef * d1 + b_coef * (w1 * d1 - d2)
}

/// `I^{mu} h` at grid node `k` for a plain-representation `h` with finite
/// node values. The quadrature is exact for `h` linear in `phi` and for any
/// `mu > 0`; node 0 returns 0.
pub fn frac_integral(h: &GridFunction, mu: f64, k: usize) -> Result<f64, FracIntError> {
    check_order(mu)?;
    if h.repr() != Representation::Plain {
        return Err(FracIntError::Representation(
            "frac_integral expects a plain representation; use frac_integral_weighted".into(),
        ));
    }
    let grid = h.grid();
    if k >= grid.len() {
        return Err(FracIntError::Domain(format!(
            "target node {k} outside grid of {} nodes",
            grid.len()
        )));
    }
    for (i, v) in h.values()[..=k].iter().enumerate() {
        if !v.is_finite() {
            return Err(FracIntError::Domain(format!(
                "integrand is not finite at node {i} (value {v})"
            )));
        }
    }
    Ok(frac_integral_unchecked(grid, h.values(), mu, k))
}

pub(crate) fn frac_integral_unchecked(grid: &PhiGrid, h: &[f64], mu: f64, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let u = grid.phi_vals();
    let v = u[k];
    let mut sum = 0.0;
    for j in 1..=k {
        let p = u[j - 1];
        let q = u[j];
        let a_coef = h[j - 1];
        let b_coef = (h[j] - h[j - 1]) / (q - p);
        sum += kernel_panel(mu, v, p, q, a_coef, b_coef);
    }
    sum / gamma_unchecked(mu)
}

/// [`frac_integral`] at every grid node; parallel over targets when the
/// `parallel` feature is enabled.
pub fn frac_integral_sweep(h: &GridFunction, mu: f64) -> Result<Vec<f64>, FracIntError> {
    validate_sweep(h, mu)?;
    let grid = h.grid();
    let values = h.values();
    Ok(par::map_indexed(grid.len(), |k| {
        frac_integral_unchecked(grid, values, mu, k)
    }))
}

/// Always-sequential twin of [`frac_integral_sweep`]; the benchmark suite
/// compares the two.
pub fn frac_integral_sweep_seq(h: &GridFunction, mu: f64) -> Result<Vec<f64>, FracIntError> {
    validate_sweep(h, mu)?;
    let grid = h.grid();
    let values = h.values();
    Ok(par::map_indexed_seq(grid.len(), |k| {
        frac_integral_unchecked(grid, values, mu, k)
    }))
}

fn validate_sweep(h: &GridFunction, mu: f64) -> Result<(), FracIntError> {
    check_order(mu)?;
    if h.repr() != Representation::Plain {
        return Err(FracIntError::Representation(
            "frac_integral_sweep expects a plain representation".into(),
        ));
    }
    for (i, v) in h.values().iter().enumerate() {
        if !v.is_finite() {
            return Err(FracIntError::Domain(format!(
                "integrand is not finite at node {i} (value {v})"
            )));
        }
    }
    Ok(())
}

/// `I^{mu}` of the plain function `h(s) = (phi(s) - phi(a))^(xi-2) * hw(s)`,
/// where `hw` is given in weighted representation with the same `xi` and
/// stays bounded near `a` even though `h` may not.
///
/// Panels with right endpoint in the left half of `[phi(a), phi(t_k)]` treat
/// the weight factor by exact moments (the kernel is smooth there); panels in
/// the right half interpolate the plain integrand against the exact kernel.
/// A panel carrying both singularities (target node 1) uses exact Beta
/// moments. `xi = 2` reduces to [`frac_integral`] of `hw`.
pub fn frac_integral_weighted(
    hw: &GridFunction,
    xi: f64,
    mu: f64,
    k: usize,
) -> Result<f64, FracIntError> {
    check_order(mu)?;
    check_xi(xi)?;
    match hw.repr() {
        Representation::Weighted { xi: stored } if stored == xi => {}
        Representation::Weighted { xi: stored } => {
            return Err(FracIntError::Representation(format!(
                "weighted representation carries xi = {stored}, asked for {xi}"
            )));
        }
        Representation::Plain => {
            return Err(FracIntError::Representation(
                "frac_integral_weighted expects a weighted representation".into(),
            ));
        }
    }
    let grid = hw.grid();
    if k >= grid.len() {
        return Err(FracIntError::Domain(format!(
            "target node {k} outside grid of {} nodes",
            grid.len()
        )));
    }
    for (i, v) in hw.values()[..=k].iter().enumerate() {
        if !v.is_finite() {
            return Err(FracIntError::Domain(format!(
                "weighted integrand is not finite at node {i} (value {v})"
            )));
        }
    }
    Ok(frac_integral_weighted_unchecked(
        grid,
        hw.values(),
        xi,
        mu,
        k,
    ))
}

pub(crate) fn frac_integral_weighted_unchecked(
    grid: &PhiGrid,
    hw: &[f64],
    xi: f64,
    mu: f64,
    k: usize,
) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if xi == 2.0 {
        // weight exponent 0: the plain product rule applies verbatim
        return frac_integral_unchecked(grid, hw, mu, k);
    }
    let u = grid.phi_vals();
    let ua = u[0];
    let v = u[k];
    let mid = 0.5 * (ua + v);
    let mut sum = 0.0;
    for j in 1..=k {
        let p = u[j - 1];
        let q = u[j];
        if j == 1 && j == k {
            // both singularities on one panel: exact Beta moments of
            // (u-p)^(xi-2) (q-u)^(mu-1) against linear hw
            let d = q - p;
            let a_coef = hw[0];
            let b_coef = (hw[1] - hw[0]) / d;
            sum += a_coef * d.powf(mu + xi - 2.0) * beta_fn(xi - 1.0, mu)
                + b_coef * d.powf(mu + xi - 1.0) * beta_fn(xi, mu);
        } else if q <= mid {
            // weight-exact branch: kernel is smooth here, fold it into the
            // linearly interpolated factor and integrate the weight moments
            let g_p = (v - p).powf(mu - 1.0) * hw[j - 1];
            let g_q = (v - q).powf(mu - 1.0) * hw[j];
            let m0 = ((q - ua).powf(xi - 1.0) - (p - ua).powf(xi - 1.0)) / (xi - 1.0);
            let m1 = ((q - ua).powf(xi) - (p - ua).powf(xi)) / xi - (p - ua) * m0;
            let b_coef = (g_q - g_p) / (q - p);
            sum += g_p * m0 + b_coef * m1;
        } else {
            // kernel-exact branch on plain endpoint values (p > phi(a) here)
            let h_p = (p - ua).powf(xi - 2.0) * hw[j - 1];
            let h_q = (q - ua).powf(xi - 2.0) * hw[j];
            let b_coef = (h_q - h_p) / (q - p);
            sum += kernel_panel(mu, v, p, q, h_p, b_coef);
        }
    }
    sum / gamma_unchecked(mu)
}

/// [`frac_integral_weighted`] at every grid node.
pub fn frac_integral_weighted_sweep(
    hw: &GridFunction,
    xi: f64,
    mu: f64,
) -> Result<Vec<f64>, FracIntError> {
    // validate once through the single-node entry point
    frac_integral_weighted(hw, xi, mu, hw.len() - 1)?;
    let grid = hw.grid();
    let values = hw.values();
    Ok(par::map_indexed(grid.len(), |k| {
        frac_integral_weighted_unchecked(grid, values, xi, mu, k)
    }))
}

fn beta_fn(x: f64, y: f64) -> f64 {
    (ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)).exp()
}

/// Exact closed form `I^{mu} (phi(t)-phi(a))^(delta-1)
/// = Gamma(delta)/Gamma(mu+delta) * (phi(t)-phi(a))^(mu+delta-1)`,
/// used as the quadrature test oracle.
pub fn powerlaw_oracle(
    mu: f64,
    delta: f64,
    phi: &PhiFunction,
    a: f64,
    t: f64,
) -> Result<f64, FracIntError> {
    check_order(mu)?;
    if !delta.is_finite() || delta <= 0.0 {
        return Err(FracIntError::Domain(format!(
            "power-law exponent shift must be positive, got {delta}"
        )));
    }
    let dist = phi.eval(t)? - phi.eval(a)?;
    Ok(gamma(delta)? / gamma(mu + delta)? * dist.powf(mu + delta - 1.0))
}

/// Numerical witness of the annihilation identity: the candidate
/// `y = (phi - phi(a))^(xi-1)` maps under `I^{2-xi}` onto a function exactly
/// linear in `phi` (so a two-fold phi-differentiation kills it). Returns the
/// max absolute deviation from that linear image, `Gamma(xi) (phi - phi(a))`.
pub fn hilfer_annihilation_check(xi: f64, grid: &Arc<PhiGrid>) -> Result<f64, FracIntError> {
    check_xi(xi)?;
    let y = GridFunction::plain(
        Arc::clone(grid),
        (0..grid.len())
            .map(|k| grid.phi_dist(k).powf(xi - 1.0))
            .collect(),
    )?;
    let image = if xi == 2.0 {
        y.values().to_vec()
    } else {
        frac_integral_sweep(&y, 2.0 - xi)?
    };
    let gxi = gamma(xi)?;
    let mut worst = 0.0f64;
    for k in 0..grid.len() {
        let target = gxi * grid.phi_dist(k);
        worst = worst.max((image[k] - target).abs());
    }
    Ok(worst)
}
