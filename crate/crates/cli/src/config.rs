//! Problem configuration files: structured TOML with sections `[problem]`,
//! repeated `[[boundary]]`, `[solver]` and optional `[stability]`.
//! Violations surface as line-numbered errors.

use serde::Deserialize;
use toml::Spanned;

use phihilfer::{BoundaryTerm, Expr, InitialGuess, PhiFunction, ProblemSpec, SolverConfig};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    problem: ProblemSection,
    #[serde(default)]
    boundary: Vec<BoundarySection>,
    #[serde(default)]
    solver: SolverSection,
    stability: Option<StabilitySection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSection {
    mu: Spanned<f64>,
    nu: Spanned<f64>,
    a: Spanned<f64>,
    b: Spanned<f64>,
    #[serde(default)]
    phi_family: Option<Spanned<String>>,
    phi_rho: Option<Spanned<f64>>,
    phi_expr: Option<Spanned<String>>,
    phi_prime_expr: Option<Spanned<String>>,
    f: Spanned<String>,
    #[serde(rename = "K")]
    k: Spanned<f64>,
    #[serde(rename = "L")]
    l: Spanned<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundarySection {
    lambda: Spanned<f64>,
    delta: Spanned<f64>,
    tau: Spanned<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SolverSection {
    grid_size: Option<Spanned<usize>>,
    grading: Option<Spanned<f64>>,
    outer_tol: Option<Spanned<f64>>,
    inner_tol: Option<Spanned<f64>>,
    outer_max_iters: Option<Spanned<usize>>,
    inner_max_iters: Option<Spanned<usize>>,
    initial_guess: Option<Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilitySection {
    chi: Option<Spanned<String>>,
    k_star: Option<Spanned<f64>>,
    perturb_amplitude: Option<Spanned<f64>>,
}

/// Stability inputs carried alongside the problem.
#[derive(Debug, Clone)]
pub struct StabilityInput {
    pub chi: Option<Expr>,
    pub k_star: Option<f64>,
    pub perturb_amplitude: Option<f64>,
}

#[derive(Debug)]
pub struct LoadedConfig {
    pub spec: ProblemSpec,
    pub solver: SolverConfig,
    pub stability: Option<StabilityInput>,
}

fn line_of(text: &str, byte: usize) -> usize {
    text[..byte.min(text.len())]
        .bytes()
        .filter(|b| *b == b'\n')
        .count()
        + 1
}

fn fail<T>(
    text: &str,
    span_start: usize,
    message: impl std::fmt::Display,
) -> Result<T, ConfigError> {
    Err(ConfigError(format!(
        "line {}: {message}",
        line_of(text, span_start)
    )))
}

pub fn load(text: &str) -> Result<LoadedConfig, ConfigError> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| ConfigError(format!("config parse error: {e}")))?;
    let p = &file.problem;

    let mu = *p.mu.get_ref();
    if !(mu.is_finite() && 1.0 < mu && mu < 2.0) {
        return fail(
            text,
            p.mu.span().start,
            format!("mu must satisfy 1 < mu < 2, got {mu}"),
        );
    }
    let nu = *p.nu.get_ref();
    if !(nu.is_finite() && (0.0..=1.0).contains(&nu)) {
        return fail(
            text,
            p.nu.span().start,
            format!("nu must satisfy 0 <= nu <= 1, got {nu}"),
        );
    }
    let a = *p.a.get_ref();
    let b = *p.b.get_ref();
    if !(a.is_finite() && b.is_finite() && a < b) {
        return fail(
            text,
            p.b.span().start,
            format!("interval must satisfy a < b, got [{a}, {b}]"),
        );
    }
    let k = *p.k.get_ref();
    if !(k.is_finite() && k > 0.0) {
        return fail(
            text,
            p.k.span().start,
            format!("K must satisfy K > 0 (the Lipschitz hypothesis), got {k}"),
        );
    }
    let l = *p.l.get_ref();
    if !(l.is_finite() && 0.0 < l && l < 1.0) {
        return fail(
            text,
            p.l.span().start,
            format!("L must satisfy 0 < L < 1 (the Lipschitz hypothesis), got {l}"),
        );
    }

    let phi = parse_phi(text, p, a)?;

    let f_src = p.f.get_ref();
    let f = Expr::parse(f_src, &["t", "y", "d"]).map_err(|e| {
        ConfigError(format!(
            "line {}: in f: {e}",
            line_of(text, p.f.span().start)
        ))
    })?;

    let mut boundary = Vec::with_capacity(file.boundary.len());
    let mut prev_tau = f64::NEG_INFINITY;
    for sec in &file.boundary {
        let delta = *sec.delta.get_ref();
        if !(delta.is_finite() && delta > 0.0) {
            return fail(
                text,
                sec.delta.span().start,
                format!("boundary delta must be positive, got {delta}"),
            );
        }
        let tau = *sec.tau.get_ref();
        if !(tau >= a && tau <= b) {
            return fail(
                text,
                sec.tau.span().start,
                format!("boundary tau = {tau} outside [{a}, {b}]"),
            );
        }
        if tau <= prev_tau {
            return fail(
                text,
                sec.tau.span().start,
                format!("boundary taus must be strictly increasing, got {tau} after {prev_tau}"),
            );
        }
        prev_tau = tau;
        boundary.push(BoundaryTerm {
            lambda: *sec.lambda.get_ref(),
            delta,
            tau,
        });
    }

    let spec = ProblemSpec::new(mu, nu, phi, a, b, boundary, f, k, l)
        .map_err(|e| ConfigError(format!("invalid problem: {e}")))?;

    let solver = parse_solver(text, &file.solver)?;

    let stability = match &file.stability {
        None => None,
        Some(sec) => {
            let chi = match &sec.chi {
                None => None,
                Some(src) => Some(Expr::parse(src.get_ref(), &["t"]).map_err(|e| {
                    ConfigError(format!(
                        "line {}: in chi: {e}",
                        line_of(text, src.span().start)
                    ))
                })?),
            };
            if let Some(ks) = &sec.k_star {
                if !(ks.get_ref().is_finite() && *ks.get_ref() > 0.0) {
                    return fail(
                        text,
                        ks.span().start,
                        format!("k_star must be positive, got {}", ks.get_ref()),
                    );
                }
            }
            if let Some(amp) = &sec.perturb_amplitude {
                if !(amp.get_ref().is_finite() && *amp.get_ref() >= 0.0) {
                    return fail(
                        text,
                        amp.span().start,
                        format!(
                            "perturb_amplitude must be nonnegative, got {}",
                            amp.get_ref()
                        ),
                    );
                }
            }
            Some(StabilityInput {
                chi,
                k_star: sec.k_star.as_ref().map(|s| *s.get_ref()),
                perturb_amplitude: sec.perturb_amplitude.as_ref().map(|s| *s.get_ref()),
            })
        }
    };

    Ok(LoadedConfig {
        spec,
        solver,
        stability,
    })
}

fn parse_phi(text: &str, p: &ProblemSection, a: f64) -> Result<PhiFunction, ConfigError> {
    let family = p
        .phi_family
        .as_ref()
        .map(|s| s.get_ref().as_str())
        .unwrap_or("identity");
    let fam_span = p.phi_family.as_ref().map(|s| s.span().start).unwrap_or(0);
    match family {
        "identity" => Ok(PhiFunction::identity()),
        "log_shift" => Ok(PhiFunction::log_shift(a)),
        "power_rho" => {
            let rho = match &p.phi_rho {
                Some(r) => *r.get_ref(),
                None => {
                    return fail(
                        text,
                        fam_span,
                        "phi_family = \"power_rho\" requires phi_rho",
                    )
                }
            };
            PhiFunction::power_rho(rho)
                .map_err(|e| ConfigError(format!("line {}: {e}", line_of(text, fam_span))))
        }
        "custom" => {
            let (phi_src, prime_src) = match (&p.phi_expr, &p.phi_prime_expr) {
                (Some(x), Some(y)) => (x, y),
                _ => {
                    return fail(
                        text,
                        fam_span,
                        "phi_family = \"custom\" requires both phi_expr and phi_prime_expr",
                    )
                }
            };
            let phi = Expr::parse(phi_src.get_ref(), &["t"]).map_err(|e| {
                ConfigError(format!(
                    "line {}: in phi_expr: {e}",
                    line_of(text, phi_src.span().start)
                ))
            })?;
            let prime = Expr::parse(prime_src.get_ref(), &["t"]).map_err(|e| {
                ConfigError(format!(
                    "line {}: in phi_prime_expr: {e}",
                    line_of(text, prime_src.span().start)
                ))
            })?;
            PhiFunction::custom(phi, prime)
                .map_err(|e| ConfigError(format!("line {}: {e}", line_of(text, fam_span))))
        }
        other => fail(
            text,
            fam_span,
            format!(
                "unknown phi_family `{other}` (expected identity | log_shift | power_rho | custom)"
            ),
        ),
    }
}

fn parse_solver(text: &str, sec: &SolverSection) -> Result<SolverConfig, ConfigError> {
    let mut cfg = SolverConfig::default();
    if let Some(n) = &sec.grid_size {
        cfg.grid_size = *n.get_ref();
        if cfg.grid_size < 4 {
            return fail(
                text,
                n.span().start,
                format!("grid_size must be at least 4, got {}", cfg.grid_size),
            );
        }
    }
    if let Some(r) = &sec.grading {
        cfg.grading = *r.get_ref();
        if !(cfg.grading.is_finite() && cfg.grading >= 1.0) {
            return fail(
                text,
                r.span().start,
                format!("grading must be >= 1, got {}", cfg.grading),
            );
        }
    }
    if let Some(t) = &sec.outer_tol {
        cfg.outer_tol = *t.get_ref();
        if !(cfg.outer_tol > 0.0) {
            return fail(text, t.span().start, "outer_tol must be positive");
        }
    }
    if let Some(t) = &sec.inner_tol {
        cfg.inner_tol = *t.get_ref();
        if !(cfg.inner_tol > 0.0) {
            return fail(text, t.span().start, "inner_tol must be positive");
        }
    }
    if let Some(m) = &sec.outer_max_iters {
        cfg.outer_max_iters = *m.get_ref();
        if cfg.outer_max_iters == 0 {
            return fail(text, m.span().start, "outer_max_iters must be at least 1");
        }
    }
    if let Some(m) = &sec.inner_max_iters {
        cfg.inner_max_iters = *m.get_ref();
        if cfg.inner_max_iters == 0 {
            return fail(text, m.span().start, "inner_max_iters must be at least 1");
        }
    }
    if let Some(g) = &sec.initial_guess {
        cfg.initial_guess = match g.get_ref().as_str() {
            "zero" => InitialGuess::Zero,
            "boundary_shape" => InitialGuess::BoundaryShape,
            other => {
                return fail(
                    text,
                    g.span().start,
                    format!("unknown initial_guess `{other}` (expected zero | boundary_shape)"),
                )
            }
        };
    }
    Ok(cfg)
}

/// Renders a loaded configuration back to TOML text that reparses to an
/// equal problem. Numbers are formatted with shortest-round-trip precision.
/// Exercised by the round-trip tests; not reachable from any subcommand.
#[allow(dead_code)]
pub fn render(loaded: &LoadedConfig) -> String {
    let spec = &loaded.spec;
    let mut out = String::new();
    out.push_str("[problem]\n");
    out.push_str(&format!("mu = {:?}\n", spec.mu()));
    out.push_str(&format!("nu = {:?}\n", spec.nu()));
    out.push_str(&format!("a = {:?}\n", spec.a()));
    out.push_str(&format!("b = {:?}\n", spec.b()));
    match spec.phi().family_tag() {
        "identity" => out.push_str("phi_family = \"identity\"\n"),
        "log_shift" => out.push_str("phi_family = \"log_shift\"\n"),
        "power_rho" => {
            out.push_str("phi_family = \"power_rho\"\n");
            // recover rho from the display form "t^rho"
            let shown = spec.phi().to_string();
            let rho = shown.trim_start_matches("t^");
            out.push_str(&format!("phi_rho = {rho}\n"));
        }
        _ => {
            out.push_str("phi_family = \"custom\"\n");
            out.push_str(&format!("phi_expr = \"{}\"\n", spec.phi()));
            // the derivative expression is not recoverable from Display;
            // custom problems round-trip through their original file text
        }
    }
    out.push_str(&format!("f = \"{}\"\n", spec.f()));
    out.push_str(&format!("K = {:?}\n", spec.lipschitz_k()));
    out.push_str(&format!("L = {:?}\n", spec.lipschitz_l()));
    for term in spec.boundary() {
        out.push_str("\n[[boundary]]\n");
        out.push_str(&format!("lambda = {:?}\n", term.lambda));
        out.push_str(&format!("delta = {:?}\n", term.delta));
        out.push_str(&format!("tau = {:?}\n", term.tau));
    }
    let s = &loaded.solver;
    out.push_str("\n[solver]\n");
    out.push_str(&format!("grid_size = {}\n", s.grid_size));
    out.push_str(&format!("grading = {:?}\n", s.grading));
    out.push_str(&format!("outer_tol = {:?}\n", s.outer_tol));
    out.push_str(&format!("inner_tol = {:?}\n", s.inner_tol));
    out.push_str(&format!("outer_max_iters = {}\n", s.outer_max_iters));
    out.push_str(&format!("inner_max_iters = {}\n", s.inner_max_iters));
    out.push_str(&format!(
        "initial_guess = \"{}\"\n",
        match s.initial_guess {
            InitialGuess::Zero => "zero",
            InitialGuess::BoundaryShape => "boundary_shape",
        }
    ));
    if let Some(st) = &loaded.stability {
        out.push_str("\n[stability]\n");
        if let Some(chi) = &st.chi {
            out.push_str(&format!("chi = \"{chi}\"\n"));
        }
        if let Some(ks) = st.k_star {
            out.push_str(&format!("k_star = {ks:?}\n"));
        }
        if let Some(amp) = st.perturb_amplitude {
            out.push_str(&format!("perturb_amplitude = {amp:?}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
[problem]
mu = 1.5
nu = 1.0
a = 0.0
b = 1.0
f = "cos(t)/(10*e^(t+1)) * (sin(y) + d)"
K = 0.036787944117144232
L = 0.036787944117144232

[[boundary]]
lambda = 1.4285714285714286
delta = 0.8
tau = 0.3333333333333333

[[boundary]]
lambda = 2.1666666666666665
delta = 2.6666666666666665
tau = 0.5

[solver]
grid_size = 128
"#;

    #[test]
    fn loads_reference_config() {
        let cfg = load(GOOD).unwrap();
        assert_eq!(cfg.spec.boundary().len(), 2);
        assert_eq!(cfg.solver.grid_size, 128);
        assert!(cfg.stability.is_none());
    }

    #[test]
    fn lipschitz_violation_names_line() {
        let bad = GOOD.replace("L = 0.036787944117144232", "L = 1.5");
        let err = load(&bad).unwrap_err().to_string();
        assert!(err.contains("L must satisfy 0 < L < 1"), "{err}");
        assert!(err.contains("line 9"), "{err}");
    }

    #[test]
    fn mu_violation_names_line() {
        let bad = GOOD.replace("mu = 1.5", "mu = 2.5");
        let err = load(&bad).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert!(err.contains("1 < mu < 2"), "{err}");
    }

    #[test]
    fn expression_errors_carry_field_line() {
        let bad = GOOD.replace("\"cos(t)/(10*e^(t+1)) * (sin(y) + d)\"", "\"cos(t) + * 2\"");
        let err = load(&bad).unwrap_err().to_string();
        assert!(err.contains("in f"), "{err}");
        assert!(err.contains("syntax error"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = GOOD.replace("[solver]", "[solver]\nfoo = 1");
        assert!(load(&bad).is_err());
    }

    #[test]
    fn custom_phi_requires_both_expressions() {
        let bad = GOOD.replace("f = ", "phi_family = \"custom\"\nf = ");
        let err = load(&bad).unwrap_err().to_string();
        assert!(err.contains("phi_prime_expr"), "{err}");
    }

    #[test]
    fn stability_section_parses() {
        let text = format!(
            "{GOOD}\n[stability]\nchi = \"mlf(1.5, (1/9) * t^1.5)\"\nk_star = 0.1111111111111111\nperturb_amplitude = 0.01\n"
        );
        let cfg = load(&text).unwrap();
        let st = cfg.stability.unwrap();
        assert!(st.chi.is_some());
        assert_eq!(st.k_star, Some(0.1111111111111111));
        assert_eq!(st.perturb_amplitude, Some(0.01));
    }

    #[test]
    fn rendered_config_reparses_to_equal_spec() {
        let text = format!(
            "{GOOD}\n[stability]\nchi = \"mlf(1.5, (1/9) * t^1.5)\"\nk_star = 0.1111111111111111\n"
        );
        let first = load(&text).unwrap();
        let rendered = render(&first);
        let second = load(&rendered).unwrap();
        assert_eq!(first.spec, second.spec);
        assert_eq!(first.solver, second.solver);
        assert_eq!(
            first.stability.as_ref().unwrap().k_star,
            second.stability.as_ref().unwrap().k_star
        );
        assert_eq!(
            first.stability.as_ref().unwrap().chi,
            second.stability.as_ref().unwrap().chi
        );
        // idempotence: rendering the reparsed config is byte-identical
        assert_eq!(rendered, render(&second));
    }

    #[test]
    fn power_family_round_trips() {
        let text = GOOD.replace("f = ", "phi_family = \"power_rho\"\nphi_rho = 0.5\nf = ");
        let first = load(&text).unwrap();
        let second = load(&render(&first)).unwrap();
        assert_eq!(first.spec, second.spec);
    }
}
