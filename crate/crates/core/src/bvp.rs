//! The nonlocal boundary value problem and its derived constants.
//!
//! A problem couples the implicit equation `D^{mu,nu} y = f(t, y, D^{mu,nu} y)`
//! on `(a, b]` with `y(a) = 0` and the nonlocal condition
//! `y(b) = sum_i lambda_i I^{delta_i} y(tau_i)`. This module computes the
//! quantities the existence theory runs on: the composite exponent `xi`, the
//! boundary determinant `Lambda`, the budget constants `Omega` and `sigma`,
//! and the boundary coefficient `A~` of the equivalent integral equation.

use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::fracint::{self, FracIntError};
use crate::grid::{GridError, GridFunction, PhiFunction, Representation};
use crate::special::{gamma, SpecialFnError};

/// Relative threshold below which `Lambda` is treated as singular.
pub const LAMBDA_SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BvpError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("Lambda = {lambda:e} is singular (within {tol:e} of zero at problem scale)")]
    SingularLambda { lambda: f64, tol: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    FracInt(#[from] FracIntError),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
}

/// One term `lambda_i I^{delta_i} y(tau_i)` of the nonlocal boundary
/// condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTerm {
    pub lambda: f64,
    pub delta: f64,
    pub tau: f64,
}

/// Full description of the boundary value problem. Validated on
/// construction; the Lipschitz constants `K` and `L` of the nonlinearity are
/// declared inputs, not estimated.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    mu: f64,
    nu: f64,
    phi: PhiFunction,
    a: f64,
    b: f64,
    boundary: Vec<BoundaryTerm>,
    f: Expr,
    lipschitz_k: f64,
    lipschitz_l: f64,
}

impl ProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mu: f64,
        nu: f64,
        phi: PhiFunction,
        a: f64,
        b: f64,
        boundary: Vec<BoundaryTerm>,
        f: Expr,
        lipschitz_k: f64,
        lipschitz_l: f64,
    ) -> Result<Self, BvpError> {
        if !(mu.is_finite() && 1.0 < mu && mu < 2.0) {
            return Err(BvpError::Invalid(format!(
                "order must satisfy 1 < mu < 2, got {mu}"
            )));
        }
        if !(nu.is_finite() && (0.0..=1.0).contains(&nu)) {
            return Err(BvpError::Invalid(format!(
                "type must satisfy 0 <= nu <= 1, got {nu}"
            )));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(BvpError::Invalid(format!(
                "interval must satisfy a < b, got [{a}, {b}]"
            )));
        }
        let mut prev_tau = f64::NEG_INFINITY;
        for (i, term) in boundary.iter().enumerate() {
            if !(term.delta.is_finite() && term.delta > 0.0) {
                return Err(BvpError::Invalid(format!(
                    "boundary term {i}: delta must be positive, got {}",
                    term.delta
                )));
            }
            if !(term.tau >= a && term.tau <= b) {
                return Err(BvpError::Invalid(format!(
                    "boundary term {i}: tau = {} outside [{a}, {b}]",
                    term.tau
                )));
            }
            if term.tau <= prev_tau {
                return Err(BvpError::Invalid(format!(
                    "boundary nodes must be strictly increasing, term {i} has tau = {}",
                    term.tau
                )));
            }
            if !term.lambda.is_finite() {
                return Err(BvpError::Invalid(format!(
                    "boundary term {i}: weight must be finite"
                )));
            }
            prev_tau = term.tau;
        }
        if !(lipschitz_k.is_finite() && lipschitz_k > 0.0) {
            return Err(BvpError::Invalid(format!(
                "Lipschitz constant K must satisfy K > 0, got {lipschitz_k}"
            )));
        }
        if !(lipschitz_l.is_finite() && 0.0 < lipschitz_l && lipschitz_l < 1.0) {
            return Err(BvpError::Invalid(format!(
                "Lipschitz constant L must satisfy 0 < L < 1, got {lipschitz_l}"
            )));
        }
        for name in f.var_names() {
            if !["t", "y", "d"].contains(&name.as_str()) && f.references(name) {
                return Err(BvpError::Invalid(format!(
                    "nonlinearity may reference only t, y, d; found `{name}`"
                )));
            }
        }
        Ok(ProblemSpec {
            mu,
            nu,
            phi,
            a,
            b,
            boundary,
            f,
            lipschitz_k,
            lipschitz_l,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn phi(&self) -> &PhiFunction {
        &self.phi
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn boundary(&self) -> &[BoundaryTerm] {
        &self.boundary
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn lipschitz_k(&self) -> f64 {
        self.lipschitz_k
    }

    pub fn lipschitz_l(&self) -> f64 {
        self.lipschitz_l
    }

    /// Composite exponent `xi = mu + nu (2 - mu)`.
    pub fn xi(&self) -> f64 {
        compute_xi(self.mu, self.nu).expect("validated on construction")
    }

    /// `phi(b) - phi(a)`.
    pub fn phi_span(&self) -> Result<f64, BvpError> {
        Ok(self.phi.eval(self.b)? - self.phi.eval(self.a)?)
    }

    /// Evaluates the nonlinearity `f(t, y, d)`.
    pub fn f_at(&self, t: f64, y: f64, d: f64) -> Result<f64, BvpError> {
        Ok(self.f.eval_named(&[("t", t), ("y", y), ("d", d)])?)
    }

    /// A copy of the problem with the nonlinearity shifted to
    /// `f + amplitude * cos(t)`: the canonical equation perturbation used by
    /// the stability certificates.
    pub fn with_cosine_perturbation(&self, amplitude: f64) -> Result<ProblemSpec, BvpError> {
        if !amplitude.is_finite() {
            return Err(BvpError::Invalid(format!(
                "perturbation amplitude must be finite, got {amplitude}"
            )));
        }
        let source = format!("({}) + {}*cos(t)", self.f, amplitude);
        let f = Expr::parse(&source, &["t", "y", "d"])?;
        let mut out = self.clone();
        out.f = f;
        Ok(out)
    }
}

/// Machine-checkable existence record: the computed constants plus the three
/// verdicts of the sufficient condition (`Lambda != 0`, `sigma < 1`,
/// `L < 1`). Failed verdicts are data, not errors.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExistenceCertificate {
    pub xi: f64,
    pub lambda: f64,
    pub omega: f64,
    pub sigma: f64,
    pub lambda_nonzero: bool,
    pub sigma_lt_one: bool,
    pub l_lt_one: bool,
}

impl ExistenceCertificate {
    pub fn passes(&self) -> bool {
        self.lambda_nonzero && self.sigma_lt_one && self.l_lt_one
    }
}

/// `xi = mu + nu (2 - mu)`, in `(1, 2]` for valid orders.
pub fn compute_xi(mu: f64, nu: f64) -> Result<f64, BvpError> {
    if !(mu.is_finite() && 1.0 < mu && mu < 2.0) {
        return Err(BvpError::Invalid(format!(
            "order must satisfy 1 < mu < 2, got {mu}"
        )));
    }
    if !(nu.is_finite() && (0.0..=1.0).contains(&nu)) {
        return Err(BvpError::Invalid(format!(
            "type must satisfy 0 <= nu <= 1, got {nu}"
        )));
    }
    Ok(mu + nu * (2.0 - mu))
}

/// Boundary determinant
/// `Lambda = (phi(b)-phi(a))^(xi-1)/Gamma(xi)
///           - sum_i lambda_i/Gamma(xi+delta_i) (phi(tau_i)-phi(a))^(xi+delta_i-1)`.
///
/// A zero value is reported as data; [`check_existence`] flags it.
pub fn compute_lambda(spec: &ProblemSpec) -> Result<f64, BvpError> {
    Ok(lambda_terms(spec)?.0)
}

/// Returns `(Lambda, scale)` where `scale` is the larger magnitude of the
/// two terms Lambda is the difference of; the singularity threshold is
/// relative to it.
fn lambda_terms(spec: &ProblemSpec) -> Result<(f64, f64), BvpError> {
    let xi = spec.xi();
    let phi_a = spec.phi.eval(spec.a)?;
    let lead = spec.phi_span()?.powf(xi - 1.0) / gamma(xi)?;
    let mut sum = 0.0;
    for term in &spec.boundary {
        let dist = spec.phi.eval(term.tau)? - phi_a;
        sum += term.lambda / gamma(xi + term.delta)? * dist.powf(xi + term.delta - 1.0);
    }
    Ok((lead - sum, lead.abs().max(sum.abs())))
}

/// `Omega = sum_i lambda_i (phi(b)-phi(a))^delta_i / Gamma(xi+mu+delta_i-1)
///          + 1/Gamma(xi+mu-1)`.
pub fn compute_omega(spec: &ProblemSpec) -> Result<f64, BvpError> {
    let xi = spec.xi();
    let span = spec.phi_span()?;
    let mut sum = 0.0;
    for term in &spec.boundary {
        sum += term.lambda * span.powf(term.delta) / gamma(xi + spec.mu + term.delta - 1.0)?;
    }
    Ok(sum + 1.0 / gamma(xi + spec.mu - 1.0)?)
}

/// Existence budget
/// `sigma = K Gamma(xi-1) (phi(b)-phi(a))^mu / (1-L)
///          * { (phi(b)-phi(a))^(xi-1) Omega / (Gamma(xi) Lambda)
///              + 1/Gamma(xi+mu-1) }`.
///
/// Errors with [`BvpError::SingularLambda`] when `Lambda` vanishes at the
/// problem's scale.
pub fn compute_sigma(spec: &ProblemSpec) -> Result<f64, BvpError> {
    let (lambda, scale) = lambda_terms(spec)?;
    let tol = LAMBDA_SINGULAR_TOL * scale.max(1.0);
    if lambda.abs() < tol {
        return Err(BvpError::SingularLambda { lambda, tol });
    }
    let omega = compute_omega(spec)?;
    sigma_from_parts(spec, lambda, omega)
}

fn sigma_from_parts(spec: &ProblemSpec, lambda: f64, omega: f64) -> Result<f64, BvpError> {
    let xi = spec.xi();
    let span = spec.phi_span()?;
    let front = spec.lipschitz_k * gamma(xi - 1.0)? * span.powf(spec.mu) / (1.0 - spec.lipschitz_l);
    let brace =
        span.powf(xi - 1.0) / (gamma(xi)? * lambda) * omega + 1.0 / gamma(xi + spec.mu - 1.0)?;
    Ok(front * brace)
}

/// Assembles the full existence certificate. Overall pass iff
/// `Lambda != 0`, `sigma < 1` and `L < 1`; a singular `Lambda` yields
/// `sigma = +inf` and a failed verdict rather than an error.
pub fn check_existence(spec: &ProblemSpec) -> Result<ExistenceCertificate, BvpError> {
    let xi = spec.xi();
    let (lambda, scale) = lambda_terms(spec)?;
    let omega = compute_omega(spec)?;
    let lambda_nonzero = lambda.abs() >= LAMBDA_SINGULAR_TOL * scale.max(1.0);
    let sigma = if lambda_nonzero {
        sigma_from_parts(spec, lambda, omega)?
    } else {
        f64::INFINITY
    };
    Ok(ExistenceCertificate {
        xi,
        lambda,
        omega,
        sigma,
        lambda_nonzero,
        sigma_lt_one: sigma < 1.0,
        l_lt_one: spec.lipschitz_l < 1.0,
    })
}

/// Boundary coefficient of the equivalent integral equation:
/// `A~ = (1/(Lambda Gamma(xi))) [ sum_i lambda_i I^{mu+delta_i} g(tau_i)
///                                - I^{mu} g(b) ]`,
/// with every fractional integral evaluated at the grid node nearest each
/// `tau_i` (grids snap the `tau_i` onto exact nodes, so no interpolation
/// error enters).
pub fn compute_a_tilde(spec: &ProblemSpec, g: &GridFunction) -> Result<f64, BvpError> {
    let (lambda, scale) = lambda_terms(spec)?;
    let tol = LAMBDA_SINGULAR_TOL * scale.max(1.0);
    if lambda.abs() < tol {
        return Err(BvpError::SingularLambda { lambda, tol });
    }
    let xi = spec.xi();
    let grid = g.grid();
    let last = grid.len() - 1;
    let integral_at = |order: f64, node: usize| -> Result<f64, BvpError> {
        let v = match g.repr() {
            Representation::Plain => fracint::frac_integral(g, order, node)?,
            Representation::Weighted { xi: stored } => {
                fracint::frac_integral_weighted(g, stored, order, node)?
            }
        };
        Ok(v)
    };
    let mut sum = 0.0;
    for term in &spec.boundary {
        let node = grid.nearest_node(term.tau);
        sum += term.lambda * integral_at(spec.mu + term.delta, node)?;
    }
    sum -= integral_at(spec.mu, last)?;
    Ok(sum / (lambda * gamma(xi)?))
}
