//! Implementations of the CLI subcommands and their output formats.

use std::fmt;
use std::fs;
use std::path::Path;

use phihilfer::{
    boundary_check, certify, check_existence, picard_solve, BoundaryTerm, BvpError,
    ExistenceCertificate, Expr, PhiFunction, ProblemSpec, Solution, SolverConfig, SolverError,
    StabilityKind,
};

use crate::config::{self, StabilityInput};
use crate::{CertifyKind, PhiVariant};

/// Default amplitude of the injected cosine perturbation in `certify`.
const DEFAULT_PERTURB_AMPLITUDE: f64 = 0.01;

/// Reference constants of the bundled problem (Caputo case) with
/// the comparison tolerances.
const REFERENCE_CONSTANTS: [(&str, f64, f64); 3] = [
    ("Lambda", 0.87045, 5e-5),
    ("Omega", 1.35464, 5e-5),
    ("sigma", 0.0881987, 1e-4),
];

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Compute(String),
    Diverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Diverged(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Compute(m) => write!(f, "compute: {m}"),
            CliError::Diverged(m) => write!(f, "solver diverged: {m}"),
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<BvpError> for CliError {
    fn from(e: BvpError) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::OuterDivergence { .. } => CliError::Diverged(e.to_string()),
            other => CliError::Compute(other.to_string()),
        }
    }
}

impl From<phihilfer::StabilityError> for CliError {
    fn from(e: phihilfer::StabilityError) -> Self {
        match e {
            phihilfer::StabilityError::Solver(SolverError::OuterDivergence { .. }) => {
                CliError::Diverged(e.to_string())
            }
            other => CliError::Compute(other.to_string()),
        }
    }
}

/// All numeric output carries 12 significant digits.
fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

fn read_config(path: &Path) -> Result<config::LoadedConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(config::load(&text)?)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn print_existence(cert: &ExistenceCertificate) {
    println!("existence certificate");
    println!("  xi      {}", sig12(cert.xi));
    println!("  Lambda  {}", sig12(cert.lambda));
    println!("  Omega   {}", sig12(cert.omega));
    println!("  sigma   {}", sig12(cert.sigma));
    println!(
        "verdicts: Lambda != 0: {} | sigma < 1: {} | L < 1: {}",
        verdict(cert.lambda_nonzero),
        verdict(cert.sigma_lt_one),
        verdict(cert.l_lt_one)
    );
    println!("overall: {}", if cert.passes() { "PASS" } else { "FAIL" });
}

pub fn cmd_check(config_path: &Path) -> Result<u8, CliError> {
    let loaded = read_config(config_path)?;
    let cert = check_existence(&loaded.spec)?;
    print_existence(&cert);
    Ok(if cert.passes() { 0 } else { 1 })
}

fn write_solution_files(
    spec: &ProblemSpec,
    sol: &Solution,
    out_csv: &Path,
    existence: &ExistenceCertificate,
) -> Result<(), CliError> {
    let grid = sol.y.grid();
    let xi = spec.xi();
    let weighted = sol
        .y
        .weighted_values(xi)
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let plain = sol.y.plain_values();
    let mut csv = String::from("t,phi_t,y_weighted,y_plain,g\n");
    for k in 0..grid.len() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            sig12(grid.nodes()[k]),
            sig12(grid.phi_vals()[k]),
            sig12(weighted[k]),
            sig12(plain[k]),
            sig12(sol.g.values()[k]),
        ));
    }
    fs::write(out_csv, csv)
        .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", out_csv.display())))?;

    let (left, right) = boundary_check(spec, sol)?;
    let sidecar = serde_json::json!({
        "a_tilde": sol.a_tilde,
        "outer_iters": sol.outer_iters,
        "converged": sol.converged,
        "final_update_norm": sol.final_update_norm,
        "residual": sol.residual,
        "left_boundary_residual": left,
        "right_boundary_residual": right,
        "existence": existence,
        "existence_warning": sol.existence_warning,
    });
    let json_path = out_csv.with_extension("json");
    fs::write(&json_path, format!("{sidecar:#}\n"))
        .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", json_path.display())))?;
    println!(
        "solve: N={}, converged={}, iters={}, residual {}",
        grid.n_panels(),
        sol.converged,
        sol.outer_iters,
        sig12(sol.residual)
    );
    println!(
        "boundary residuals: left {}, right {}",
        sig12(left),
        sig12(right)
    );
    println!("wrote {} and {}", out_csv.display(), json_path.display());
    Ok(())
}

pub fn cmd_solve(config_path: &Path, out: &Path, grid_size: Option<usize>) -> Result<u8, CliError> {
    let loaded = read_config(config_path)?;
    let mut cfg = loaded.solver;
    if let Some(n) = grid_size {
        cfg.grid_size = n;
    }
    let existence = check_existence(&loaded.spec)?;
    match picard_solve(&loaded.spec, &cfg) {
        Ok(sol) => {
            write_solution_files(&loaded.spec, &sol, out, &existence)?;
            if sol.existence_warning {
                println!("warning: existence pre-check did not pass (sigma >= 1, singular Lambda, or L >= 1)");
            }
            Ok(if sol.converged { 0 } else { 4 })
        }
        Err(SolverError::OuterDivergence {
            iters,
            first_norm,
            last_norm,
        }) => {
            let sidecar = serde_json::json!({
                "converged": false,
                "diverged": true,
                "outer_iters": iters,
                "first_update_norm": first_norm,
                "last_update_norm": last_norm,
                "existence": existence,
            });
            let json_path = out.with_extension("json");
            fs::write(&json_path, format!("{sidecar:#}\n")).map_err(|e| {
                CliError::Compute(format!("cannot write {}: {e}", json_path.display()))
            })?;
            eprintln!(
                "solver diverged after {iters} iterations (update norm {} -> {}); diagnostics in {}",
                sig12(first_norm),
                sig12(last_norm),
                json_path.display()
            );
            Ok(4)
        }
        Err(other) => Err(other.into()),
    }
}

pub fn cmd_certify(
    config_path: &Path,
    kind: CertifyKind,
    perturb_amplitude: Option<f64>,
    grid_size: Option<usize>,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let loaded = read_config(config_path)?;
    let mut cfg = loaded.solver;
    if let Some(n) = grid_size {
        cfg.grid_size = n;
    }
    let stability = loaded.stability;
    let (stability_kind, chi, k_star) = match kind {
        CertifyKind::Uh => (StabilityKind::UlamHyers, None, None),
        CertifyKind::Rassias => {
            let st: &StabilityInput = stability.as_ref().ok_or_else(|| {
                CliError::Config(
                    "kind = rassias requires a [stability] section with chi and k_star".into(),
                )
            })?;
            let chi = st.chi.clone().ok_or_else(|| {
                CliError::Config("kind = rassias requires chi in [stability]".into())
            })?;
            let k_star = st.k_star.ok_or_else(|| {
                CliError::Config("kind = rassias requires k_star in [stability]".into())
            })?;
            (StabilityKind::UlamHyersRassias, Some(chi), Some(k_star))
        }
    };
    let amplitude = perturb_amplitude
        .or_else(|| stability.as_ref().and_then(|s| s.perturb_amplitude))
        .unwrap_or(DEFAULT_PERTURB_AMPLITUDE);
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(CliError::Config(format!(
            "perturbation amplitude must be nonnegative, got {amplitude}"
        )));
    }

    let perturbed = loaded.spec.with_cosine_perturbation(amplitude)?;
    let z = picard_solve(&perturbed, &cfg)?;
    if !z.converged {
        return Err(CliError::Diverged(
            "perturbed solve stalled before reaching tolerance".into(),
        ));
    }
    let cert = certify(
        &loaded.spec,
        &z.y,
        stability_kind,
        chi.as_ref(),
        k_star,
        None,
        &cfg,
    )?;

    println!(
        "stability certificate: kind = {}, perturbation amplitude = {}",
        match kind {
            CertifyKind::Uh => "ulam-hyers",
            CertifyKind::Rassias => "ulam-hyers-rassias",
        },
        sig12(amplitude)
    );
    println!("  epsilon (measured)  {}", sig12(cert.epsilon));
    println!("  stability constant  {}", sig12(cert.c));
    if let (Some(ks), Some(ratio), Some(ok)) =
        (cert.k_star, cert.k_star_worst_ratio, cert.k_star_verified)
    {
        println!(
            "  K* = {} comparison condition: {} (worst ratio {})",
            sig12(ks),
            verdict(ok),
            sig12(ratio)
        );
    }
    println!(
        "  bound: {} (gap {})",
        if cert.bound_holds { "HOLDS" } else { "FAILS" },
        sig12(cert.observed_gap)
    );
    if let Some(path) = out {
        let body = serde_json::json!({
            "perturb_amplitude": amplitude,
            "grid_size": cfg.grid_size,
            "certificate": cert,
        });
        fs::write(path, format!("{body:#}\n"))
            .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(if cert.bound_holds { 0 } else { 1 })
}

/// The bundled reference problem: the implicit equation with nonlinearity
/// `cos(t)/(10 e^(t+1)) (sin y + d)`, two nonlocal boundary terms, and
/// `K = L = 1/(10e)`, posed with `mu = 3/2`, `nu = 1` over `[0, 1]`.
fn reference_spec(phi: PhiFunction) -> ProblemSpec {
    let k = 1.0 / (10.0 * std::f64::consts::E);
    ProblemSpec::new(
        1.5,
        1.0,
        phi,
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
    .expect("reference problem is valid")
}

struct Variant {
    name: &'static str,
    phi: PhiFunction,
    /// `chi(t) = E_mu((1/9) (phi(t)-phi(a))^mu)` spelled for this transform.
    chi_source: &'static str,
    compare: bool,
}

fn variants(filter: Option<PhiVariant>) -> Vec<Variant> {
    let all = [
        Variant {
            name: "identity (phi(t) = t, Caputo case)",
            phi: PhiFunction::identity(),
            chi_source: "mlf(1.5, (1/9) * t^1.5)",
            compare: true,
        },
        Variant {
            name: "log (phi(t) = log(1+t), Hadamard-type)",
            phi: PhiFunction::log_shift(0.0),
            chi_source: "mlf(1.5, (1/9) * log(1+t)^1.5)",
            compare: false,
        },
        Variant {
            name: "power (phi(t) = t^0.5, Katugampola-type)",
            phi: PhiFunction::power_rho(0.5).expect("valid exponent"),
            chi_source: "mlf(1.5, (1/9) * (t^0.5)^1.5)",
            compare: false,
        },
    ];
    all.into_iter()
        .filter(|v| match filter {
            None => true,
            Some(PhiVariant::Identity) => v.compare,
            Some(PhiVariant::Log) => v.name.starts_with("log"),
            Some(PhiVariant::Power) => v.name.starts_with("power"),
        })
        .collect()
}

pub fn cmd_reproduce_example(
    filter: Option<PhiVariant>,
    grid_size: Option<usize>,
) -> Result<u8, CliError> {
    let cfg = SolverConfig {
        grid_size: grid_size.unwrap_or(1024),
        ..SolverConfig::default()
    };
    let mut all_match = true;
    for variant in variants(filter) {
        println!("== variant: {} ==", variant.name);
        let spec = reference_spec(variant.phi.clone());
        let cert = check_existence(&spec)?;
        if variant.compare {
            println!(
                "  constant  computed              reference    |diff|         tolerance  verdict"
            );
            for (name, reference, tol) in REFERENCE_CONSTANTS {
                let computed = match name {
                    "Lambda" => cert.lambda,
                    "Omega" => cert.omega,
                    _ => cert.sigma,
                };
                let diff = (computed - reference).abs();
                let ok = diff <= tol;
                all_match &= ok;
                println!(
                    "  {:<8}  {:<20}  {:<11}  {:<13}  {:<9}  {}",
                    name,
                    sig12(computed),
                    reference,
                    format!("{diff:.5e}"),
                    format!("{tol:e}"),
                    if ok { "ok" } else { "MISMATCH" }
                );
            }
        } else {
            println!(
                "  constants (informational): Lambda {}, Omega {}, sigma {}",
                sig12(cert.lambda),
                sig12(cert.omega),
                sig12(cert.sigma)
            );
        }
        println!(
            "  existence: sigma = {} -> {}",
            sig12(cert.sigma),
            if cert.passes() {
                "certified (sigma < 1)"
            } else {
                "not certified"
            }
        );

        let sol = picard_solve(&spec, &cfg)?;
        let (left, right) = boundary_check(&spec, &sol)?;
        println!(
            "  solve: N={}, converged={}, iters={}, residual {}",
            cfg.grid_size,
            sol.converged,
            sol.outer_iters,
            sig12(sol.residual)
        );
        println!(
            "  boundary residuals: left {}, right {}",
            sig12(left),
            sig12(right)
        );

        // Ulam-Hyers certificate against a perturbed trajectory
        let perturbed = spec.with_cosine_perturbation(DEFAULT_PERTURB_AMPLITUDE)?;
        let z = picard_solve(&perturbed, &cfg)?;
        let uh = certify(
            &spec,
            &z.y,
            StabilityKind::UlamHyers,
            None,
            None,
            None,
            &cfg,
        )?;
        println!(
            "  ulam-hyers (amplitude {}): epsilon {}, C_f {}, bound {} (gap {})",
            DEFAULT_PERTURB_AMPLITUDE,
            sig12(uh.epsilon),
            sig12(uh.c),
            if uh.bound_holds { "HOLDS" } else { "FAILS" },
            sig12(uh.observed_gap)
        );

        // Ulam-Hyers-Rassias with the reference weight and K* = 1/9
        let chi = Expr::parse(variant.chi_source, &["t"]).expect("valid weight expression");
        let uhr = certify(
            &spec,
            &z.y,
            StabilityKind::UlamHyersRassias,
            Some(&chi),
            Some(1.0 / 9.0),
            None,
            &cfg,
        )?;
        println!(
            "  ulam-hyers-rassias (K* = 1/9, chi = {}):",
            variant.chi_source
        );
        println!(
            "    K* condition {} (worst ratio {}), C_f_chi {}, bound {} (gap {})",
            verdict(uhr.k_star_verified.unwrap_or(false)),
            sig12(uhr.k_star_worst_ratio.unwrap_or(f64::NAN)),
            sig12(uhr.c),
            if uhr.bound_holds { "HOLDS" } else { "FAILS" },
            sig12(uhr.observed_gap)
        );
    }
    if filter.is_none() || filter == Some(PhiVariant::Identity) {
        println!(
            "reference constants: {}",
            if all_match { "ALL MATCH" } else { "MISMATCH" }
        );
        Ok(if all_match { 0 } else { 1 })
    } else {
        Ok(0)
    }
}
