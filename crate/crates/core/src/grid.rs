//! Discretization of the interval with respect to an increasing function
//! `phi`, and functions sampled on that discretization.
//!
//! All quadrature in this crate works in the transformed variable
//! `u = phi(s)`: grids are laid out in u-space with nodes clustered toward
//! the left endpoint (grading exponent `r`), because both the kernel and the
//! weighted-space singularities live there. Boundary nodes `tau_i` are
//! snapped onto exact grid nodes so the boundary functionals carry no
//! interpolation error.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{Expr, ExprError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    Invalid(String),
    #[error("phi is not strictly increasing on the grid (node {index}: phi {prev} -> {next})")]
    NonIncreasingPhi { index: usize, prev: f64, next: f64 },
    #[error("phi'({t}) = {value} is not positive")]
    NonPositivePhiPrime { t: f64, value: f64 },
    #[error("expression error in phi: {0}")]
    Expr(#[from] ExprError),
}

/// The increasing transform `phi` the fractional operators are taken with
/// respect to. Built-in families instantiate the classical operator types
/// (identity: Riemann-Liouville/Caputo, log_shift: Hadamard-type,
/// power_rho: Katugampola-type); `custom` takes `phi` and `phi'` as
/// expressions in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiFunction {
    kind: PhiKind,
}

#[derive(Debug, Clone, PartialEq)]
enum PhiKind {
    Identity,
    /// `phi(t) = log(1 + t - anchor)`, anchored at the interval's left end.
    LogShift {
        anchor: f64,
    },
    /// `phi(t) = t^rho`, `rho > 0`, for intervals with `a >= 0`.
    PowerRho {
        rho: f64,
    },
    Custom {
        phi: Expr,
        phi_prime: Expr,
    },
}

impl PhiFunction {
    pub fn identity() -> Self {
        PhiFunction {
            kind: PhiKind::Identity,
        }
    }

    pub fn log_shift(anchor: f64) -> Self {
        PhiFunction {
            kind: PhiKind::LogShift { anchor },
        }
    }

    pub fn power_rho(rho: f64) -> Result<Self, GridError> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(GridError::Invalid(format!(
                "power family exponent must be positive, got {rho}"
            )));
        }
        Ok(PhiFunction {
            kind: PhiKind::PowerRho { rho },
        })
    }

    /// Custom family: both `phi` and its derivative are supplied explicitly;
    /// the derivative is never approximated numerically.
    pub fn custom(phi: Expr, phi_prime: Expr) -> Result<Self, GridError> {
        for (what, e) in [("phi", &phi), ("phi_prime", &phi_prime)] {
            for name in e.var_names() {
                if name != "t" && e.references(name) {
                    return Err(GridError::Invalid(format!(
                        "{what} may reference only `t`, found `{name}`"
                    )));
                }
            }
        }
        Ok(PhiFunction {
            kind: PhiKind::Custom { phi, phi_prime },
        })
    }

    pub fn family_tag(&self) -> &'static str {
        match self.kind {
            PhiKind::Identity => "identity",
            PhiKind::LogShift { .. } => "log_shift",
            PhiKind::PowerRho { .. } => "power_rho",
            PhiKind::Custom { .. } => "custom",
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64, GridError> {
        match &self.kind {
            PhiKind::Identity => Ok(t),
            PhiKind::LogShift { anchor } => {
                let arg = 1.0 + t - anchor;
                if arg <= 0.0 {
                    return Err(GridError::Invalid(format!(
                        "log_shift undefined at t = {t} (anchor {anchor})"
                    )));
                }
                Ok(arg.ln())
            }
            PhiKind::PowerRho { rho } => {
                if t < 0.0 {
                    return Err(GridError::Invalid(format!(
                        "power family requires t >= 0, got {t}"
                    )));
                }
                Ok(t.powf(*rho))
            }
            PhiKind::Custom { phi, .. } => Ok(phi.eval_at(&[t])?),
        }
    }

    pub fn eval_prime(&self, t: f64) -> Result<f64, GridError> {
        match &self.kind {
            PhiKind::Identity => Ok(1.0),
            PhiKind::LogShift { anchor } => Ok(1.0 / (1.0 + t - anchor)),
            PhiKind::PowerRho { rho } => {
                if t == 0.0 && *rho < 1.0 {
                    // left-endpoint slope of t^rho; the quadrature never
                    // evaluates phi' so an infinite slope at a is harmless
                    return Ok(f64::INFINITY);
                }
                Ok(rho * t.powf(rho - 1.0))
            }
            PhiKind::Custom { phi_prime, .. } => Ok(phi_prime.eval_at(&[t])?),
        }
    }

    /// Inverse of `phi` on `[lo, hi]`; analytic for built-in families,
    /// bisection (phi is strictly increasing) for custom ones.
    fn invert(&self, u: f64, lo: f64, hi: f64) -> Result<f64, GridError> {
        match &self.kind {
            PhiKind::Identity => Ok(u),
            PhiKind::LogShift { anchor } => Ok(anchor + u.exp_m1()),
            PhiKind::PowerRho { rho } => Ok(u.powf(1.0 / rho)),
            PhiKind::Custom { .. } => {
                let mut lo = lo;
                let mut hi = hi;
                let flo = self.eval(lo)?;
                if u <= flo {
                    return Ok(lo);
                }
                if u >= self.eval(hi)? {
                    return Ok(hi);
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.eval(mid)? < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
                        break;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }
}

impl fmt::Display for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PhiKind::Identity => write!(f, "t"),
            PhiKind::LogShift { anchor } => write!(f, "log(1 + t - {anchor})"),
            PhiKind::PowerRho { rho } => write!(f, "t^{rho}"),
            PhiKind::Custom { phi, .. } => write!(f, "{phi}"),
        }
    }
}

/// Discretization of `[a, b]` with node values of `phi` and `phi'`.
///
/// Layout: `phi(t_i) = phi(a) + (phi(b) - phi(a)) * (i/N)^r` (graded in
/// u-space, default `r = 2`), then pulled back through `phi^{-1}`. The
/// requested snap points replace their nearest interior nodes exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiGrid {
    nodes: Vec<f64>,
    phi_vals: Vec<f64>,
    phi_prime_vals: Vec<f64>,
    grading: f64,
}

pub const DEFAULT_GRADING: f64 = 2.0;

impl PhiGrid {
    pub fn build(
        phi: &PhiFunction,
        a: f64,
        b: f64,
        n: usize,
        grading: f64,
        snap: &[f64],
    ) -> Result<Arc<PhiGrid>, GridError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(GridError::Invalid(format!(
                "interval must satisfy a < b, got [{a}, {b}]"
            )));
        }
        if n < 4 {
            return Err(GridError::Invalid(format!(
                "grid needs at least 4 panels, got {n}"
            )));
        }
        if !grading.is_finite() || grading < 1.0 {
            return Err(GridError::Invalid(format!(
                "grading exponent must be >= 1, got {grading}"
            )));
        }
        let ua = phi.eval(a)?;
        let ub = phi.eval(b)?;
        if !(ub > ua) {
            return Err(GridError::Invalid(format!(
                "phi must increase over the interval: phi({a}) = {ua}, phi({b}) = {ub}"
            )));
        }
        let mut phi_vals = Vec::with_capacity(n + 1);
        let mut nodes = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let frac = (i as f64 / n as f64).powf(grading);
            let u = ua + (ub - ua) * frac;
            let t = if i == 0 {
                a
            } else if i == n {
                b
            } else {
                phi.invert(u, a, b)?
            };
            phi_vals.push(if i == 0 {
                ua
            } else if i == n {
                ub
            } else {
                u
            });
            nodes.push(t);
        }
        // snap requested nodes (boundary tau's) onto exact grid nodes
        let mut last_used = 0usize;
        for &s in snap {
            if !(a..=b).contains(&s) {
                return Err(GridError::Invalid(format!(
                    "snap point {s} outside [{a}, {b}]"
                )));
            }
            if s == a || s == b {
                continue;
            }
            let us = phi.eval(s)?;
            let mut k = nearest_index(&phi_vals, us);
            k = k.clamp(1, n - 1);
            if k <= last_used {
                k = last_used + 1;
                if k >= n {
                    return Err(GridError::Invalid(
                        "too many snap points for the grid size".into(),
                    ));
                }
            }
            nodes[k] = s;
            phi_vals[k] = us;
            last_used = k;
        }
        for i in 0..n {
            if !(phi_vals[i + 1] > phi_vals[i]) {
                return Err(GridError::NonIncreasingPhi {
                    index: i,
                    prev: phi_vals[i],
                    next: phi_vals[i + 1],
                });
            }
        }
        let mut phi_prime_vals = Vec::with_capacity(n + 1);
        for (i, &t) in nodes.iter().enumerate() {
            let d = phi.eval_prime(t)?;
            // an infinite left-endpoint slope is tolerated (power families);
            // elsewhere phi' must be finite and positive
            let endpoint_singular = i == 0 && d == f64::INFINITY;
            if !endpoint_singular && !(d.is_finite() && d > 0.0) {
                return Err(GridError::NonPositivePhiPrime { t, value: d });
            }
            phi_prime_vals.push(d);
        }
        Ok(Arc::new(PhiGrid {
            nodes,
            phi_vals,
            phi_prime_vals,
            grading,
        }))
    }

    /// Number of panels; the grid has `len() + 1 = n_panels() + 1` nodes.
    pub fn n_panels(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn phi_vals(&self) -> &[f64] {
        &self.phi_vals
    }

    pub fn phi_prime_vals(&self) -> &[f64] {
        &self.phi_prime_vals
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn a(&self) -> f64 {
        self.nodes[0]
    }

    pub fn b(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn phi_a(&self) -> f64 {
        self.phi_vals[0]
    }

    pub fn phi_b(&self) -> f64 {
        *self.phi_vals.last().unwrap()
    }

    /// Index of the grid node nearest to `t`.
    pub fn nearest_node(&self, t: f64) -> usize {
        nearest_index(&self.nodes, t)
    }

    /// `phi(t_k) - phi(a)` at node `k`.
    pub fn phi_dist(&self, k: usize) -> f64 {
        self.phi_vals[k] - self.phi_vals[0]
    }
}

fn nearest_index(sorted: &[f64], x: f64) -> usize {
    match sorted.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => i,
        Err(i) => {
            if i == 0 {
                0
            } else if i >= sorted.len() {
                sorted.len() - 1
            } else if (x - sorted[i - 1]).abs() <= (sorted[i] - x).abs() {
                i - 1
            } else {
                i
            }
        }
    }
}

/// How the sample values of a [`GridFunction`] are stored.
///
/// `Weighted { xi }` stores `(phi(t) - phi(a))^(2 - xi) * y(t)`: the natural
/// representation for members of the weighted space, which stay bounded near
/// `a` even when the plain function does not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Representation {
    Plain,
    Weighted { xi: f64 },
}

/// A real-valued function sampled at the nodes of a [`PhiGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<PhiGrid>,
    values: Vec<f64>,
    repr: Representation,
}

impl GridFunction {
    pub fn plain(grid: Arc<PhiGrid>, values: Vec<f64>) -> Result<Self, GridError> {
        Self::with_repr(grid, values, Representation::Plain)
    }

    pub fn weighted(grid: Arc<PhiGrid>, values: Vec<f64>, xi: f64) -> Result<Self, GridError> {
        Self::with_repr(grid, values, Representation::Weighted { xi })
    }

    fn with_repr(
        grid: Arc<PhiGrid>,
        values: Vec<f64>,
        repr: Representation,
    ) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::Invalid(format!(
                "value count {} does not match grid node count {}",
                values.len(),
                grid.len()
            )));
        }
        if let Representation::Weighted { xi } = repr {
            if !(1.0 < xi && xi <= 2.0) {
                return Err(GridError::Invalid(format!(
                    "weighted representation requires 1 < xi <= 2, got {xi}"
                )));
            }
        }
        Ok(GridFunction { grid, values, repr })
    }

    /// Samples a plain function of `t` at every node.
    pub fn sample_plain(grid: &Arc<PhiGrid>, mut f: impl FnMut(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        GridFunction {
            grid: Arc::clone(grid),
            values,
            repr: Representation::Plain,
        }
    }

    pub fn zeros(grid: &Arc<PhiGrid>) -> Self {
        GridFunction {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
            repr: Representation::Plain,
        }
    }

    pub fn grid(&self) -> &Arc<PhiGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn repr(&self) -> Representation {
        self.repr
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Plain node values. Converting a weighted representation multiplies by
    /// `(phi(t) - phi(a))^(xi - 2)`; at `t = a` that factor is singular for
    /// `xi < 2`, and the reconstruction takes the boundary value 0 there
    /// (every solution-like quantity vanishes at `a` since `xi > 1`).
    pub fn plain_values(&self) -> Vec<f64> {
        match self.repr {
            Representation::Plain => self.values.clone(),
            Representation::Weighted { xi } => {
                let mut out = Vec::with_capacity(self.values.len());
                for (k, &w) in self.values.iter().enumerate() {
                    if k == 0 {
                        out.push(if xi == 2.0 { w } else { 0.0 });
                    } else {
                        out.push(self.grid.phi_dist(k).powf(xi - 2.0) * w);
                    }
                }
                out
            }
        }
    }

    /// Weighted node values for the given `xi`. At `t = a` the factor
    /// `(phi - phi(a))^(2 - xi)` is 0 for `xi < 2`, so a finite plain value
    /// weights to 0; an already-weighted function keeps its stored value.
    pub fn weighted_values(&self, xi: f64) -> Result<Vec<f64>, GridError> {
        if !(1.0 < xi && xi <= 2.0) {
            return Err(GridError::Invalid(format!(
                "weighted values require 1 < xi <= 2, got {xi}"
            )));
        }
        match self.repr {
            Representation::Weighted { xi: stored } if stored == xi => Ok(self.values.clone()),
            Representation::Weighted { xi: stored } => {
                // re-weight through the plain representation; boundary value 0
                let mut out = Vec::with_capacity(self.values.len());
                for (k, &w) in self.values.iter().enumerate() {
                    if k == 0 {
                        out.push(0.0);
                    } else {
                        out.push(self.grid.phi_dist(k).powf(xi - stored) * w);
                    }
                }
                Ok(out)
            }
            Representation::Plain => {
                let mut out = Vec::with_capacity(self.values.len());
                for (k, &v) in self.values.iter().enumerate() {
                    if k == 0 {
                        out.push(if xi == 2.0 { v } else { 0.0 });
                    } else {
                        out.push(self.grid.phi_dist(k).powf(2.0 - xi) * v);
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn to_weighted(&self, xi: f64) -> Result<GridFunction, GridError> {
        Ok(GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.weighted_values(xi)?,
            repr: Representation::Weighted { xi },
        })
    }

    /// Max-norm of the weighted representation: the norm of the weighted
    /// space the solver converges in. At `t = a` the weighted value comes
    /// from the stored weighted representation when one exists.
    pub fn weighted_norm(&self, xi: f64) -> Result<f64, GridError> {
        let w = self.weighted_values(xi)?;
        Ok(w.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// Pointwise linear combination `alpha * self + beta * other`;
    /// both functions must share the grid and the representation.
    pub fn linear_comb(
        &self,
        alpha: f64,
        other: &GridFunction,
        beta: f64,
    ) -> Result<GridFunction, GridError> {
        if !Arc::ptr_eq(&self.grid, &other.grid) {
            return Err(GridError::Invalid(
                "grid functions live on different grids".into(),
            ));
        }
        if self.repr != other.repr {
            return Err(GridError::Invalid(
                "grid functions have different representations".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        Ok(GridFunction {
            grid: Arc::clone(&self.grid),
            values,
            repr: self.repr,
        })
    }

    pub fn scale(&self, alpha: f64) -> GridFunction {
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| alpha * v).collect(),
            repr: self.repr,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_grid(n: usize) -> Arc<PhiGrid> {
        PhiGrid::build(&PhiFunction::identity(), 0.0, 1.0, n, 2.0, &[]).unwrap()
    }

    #[test]
    fn graded_layout_in_phi_space() {
        let g = unit_grid(8);
        for i in 0..=8 {
            let expect = (i as f64 / 8.0).powi(2);
            assert_relative_eq!(g.phi_vals()[i], expect, max_relative = 1e-15);
        }
        assert_eq!(g.a(), 0.0);
        assert_eq!(g.b(), 1.0);
    }

    #[test]
    fn snap_points_become_exact_nodes() {
        let taus = [1.0 / 3.0, 0.5];
        let g = PhiGrid::build(&PhiFunction::identity(), 0.0, 1.0, 64, 2.0, &taus).unwrap();
        for &tau in &taus {
            let k = g.nearest_node(tau);
            assert_eq!(g.nodes()[k], tau);
        }
        // still strictly increasing
        for i in 0..g.n_panels() {
            assert!(g.phi_vals()[i + 1] > g.phi_vals()[i]);
        }
    }

    #[test]
    fn log_family_pullback() {
        let phi = PhiFunction::log_shift(0.0);
        let g = PhiGrid::build(&phi, 0.0, 1.0, 16, 2.0, &[]).unwrap();
        let ub = 2.0f64.ln();
        for i in 0..=16 {
            let u = ub * (i as f64 / 16.0).powi(2);
            assert_relative_eq!(g.phi_vals()[i], u, max_relative = 1e-12);
            assert_relative_eq!((1.0 + g.nodes()[i]).ln(), u, epsilon = 1e-12);
        }
    }

    #[test]
    fn power_family_allows_singular_left_slope() {
        let phi = PhiFunction::power_rho(0.5).unwrap();
        let g = PhiGrid::build(&phi, 0.0, 1.0, 16, 2.0, &[]).unwrap();
        assert_eq!(g.phi_prime_vals()[0], f64::INFINITY);
        assert!(g.phi_prime_vals()[1..]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn custom_phi_must_increase() {
        let phi = PhiFunction::custom(
            Expr::parse("-t", &["t"]).unwrap(),
            Expr::parse("-1", &["t"]).unwrap(),
        )
        .unwrap();
        assert!(PhiGrid::build(&phi, 0.0, 1.0, 16, 2.0, &[]).is_err());
    }

    #[test]
    fn custom_phi_bisection_inverse() {
        // phi(t) = t + t^3 is increasing but has no closed-form inverse here.
        let phi = PhiFunction::custom(
            Expr::parse("t + t^3", &["t"]).unwrap(),
            Expr::parse("1 + 3*t^2", &["t"]).unwrap(),
        )
        .unwrap();
        let g = PhiGrid::build(&phi, 0.0, 1.0, 32, 2.0, &[]).unwrap();
        for i in 0..=32 {
            let t = g.nodes()[i];
            assert_relative_eq!(t + t * t * t, g.phi_vals()[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn weighted_norm_of_powerlaw_cancellation() {
        // y = (phi - phi(a))^(xi - 2) has weighted value identically 1
        let g = unit_grid(64);
        let xi = 1.5;
        let mut vals = vec![1.0];
        vals.extend((1..=64).map(|k| g.phi_dist(k).powf(xi - 2.0)));
        let y = GridFunction::plain(Arc::clone(&g), vals).unwrap();
        // plain at node 0 would be singular; build from the weighted side
        let w = GridFunction::weighted(Arc::clone(&g), vec![1.0; 65], xi).unwrap();
        assert_eq!(w.weighted_norm(xi).unwrap(), 1.0);
        // away from the endpoint the plain conversion agrees
        let plain = w.plain_values();
        for k in 1..=64 {
            assert_relative_eq!(plain[k], y.values()[k], max_relative = 1e-12);
        }
    }

    #[test]
    fn weighted_norm_of_shifted_powerlaw() {
        // y = (phi - phi(a))^(xi - 1): weighted value is phi-distance,
        // increasing, so the norm is phi(b) - phi(a)
        let g = unit_grid(64);
        let xi = 1.5;
        let y = GridFunction::plain(
            Arc::clone(&g),
            (0..=64).map(|k| g.phi_dist(k).powf(xi - 1.0)).collect(),
        )
        .unwrap();
        assert_relative_eq!(y.weighted_norm(xi).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_norm() {
        let g = unit_grid(16);
        let z = GridFunction::zeros(&g);
        assert_eq!(z.weighted_norm(1.5).unwrap(), 0.0);
    }

    #[test]
    fn norm_axioms_on_samples() {
        let g = unit_grid(32);
        let f1 = GridFunction::sample_plain(&g, |t| (3.0 * t).sin());
        let f2 = GridFunction::sample_plain(&g, |t| t * t - 0.3);
        let xi = 1.7;
        // absolute homogeneity
        let alpha = -2.5;
        assert_relative_eq!(
            f1.scale(alpha).weighted_norm(xi).unwrap(),
            alpha.abs() * f1.weighted_norm(xi).unwrap(),
            max_relative = 1e-14
        );
        // triangle inequality
        let sum = f1.linear_comb(1.0, &f2, 1.0).unwrap();
        assert!(
            sum.weighted_norm(xi).unwrap()
                <= f1.weighted_norm(xi).unwrap() + f2.weighted_norm(xi).unwrap() + 1e-15
        );
    }

    #[test]
    fn length_mismatch_rejected() {
        let g = unit_grid(16);
        assert!(GridFunction::plain(g, vec![0.0; 3]).is_err());
    }
}
