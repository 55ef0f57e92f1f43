//! Command-line front end: load problem configurations, run
//! check / solve / certify pipelines, and reproduce the bundled reference
//! example with its reference constants.

// negated comparisons are deliberate NaN-rejecting guards on config input
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "phihilfer",
    version,
    about = "Nonlocal boundary value problems for implicit fractional differential equations \
             under the phi-Hilfer derivative: solves, existence checks, Ulam-stability certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the existence certificate (xi, Lambda, Omega, sigma) for a
    /// problem configuration
    Check {
        /// Problem configuration file (TOML)
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve the equivalent integral equation and write the trajectory as
    /// CSV with a JSON sidecar of scalar diagnostics
    Solve {
        /// Problem configuration file (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; the sidecar replaces its extension with .json
        #[arg(long)]
        out: PathBuf,
        /// Override the configured grid size
        #[arg(long)]
        grid_size: Option<usize>,
    },
    /// Solve a perturbed problem, measure its defect, and certify the
    /// Ulam-type stability bound
    Certify {
        /// Problem configuration file (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Certificate kind
        #[arg(long, value_enum)]
        kind: CertifyKind,
        /// Amplitude of the cosine perturbation injected into the equation
        #[arg(long)]
        perturb_amplitude: Option<f64>,
        /// Override the configured grid size
        #[arg(long)]
        grid_size: Option<usize>,
        /// Optional JSON output path for the certificate
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the bundled reference problem (and transform variants) and
    /// compare the computed constants against their reference values
    ReproduceExample {
        /// Restrict the run to one transform variant
        #[arg(long, value_enum)]
        phi_variant: Option<PhiVariant>,
        /// Override the grid size (default 1024)
        #[arg(long)]
        grid_size: Option<usize>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CertifyKind {
    /// Ulam-Hyers: weighted-norm deviation bound C_f * epsilon
    Uh,
    /// Ulam-Hyers-Rassias: pointwise bound epsilon * C_{f,chi} * chi(t)
    Rassias,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PhiVariant {
    Identity,
    Log,
    Power,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Check { config } => commands::cmd_check(&config),
        Command::Solve {
            config,
            out,
            grid_size,
        } => commands::cmd_solve(&config, &out, grid_size),
        Command::Certify {
            config,
            kind,
            perturb_amplitude,
            grid_size,
            out,
        } => commands::cmd_certify(&config, kind, perturb_amplitude, grid_size, out.as_deref()),
        Command::ReproduceExample {
            phi_variant,
            grid_size,
        } => commands::cmd_reproduce_example(phi_variant, grid_size),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
