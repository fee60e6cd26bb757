//! `larche`: command-line driver for the Cahn-Larché laboratory.
//!
//! Exit codes: 0 success, 1 module error (a named precondition or solver
//! failure), 2 configuration/schema error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use larche_core::potential::DoubleWell;

mod commands;
mod config;
mod setup;

#[derive(Parser)]
#[command(name = "larche", version, about = "Cahn-Larché diffuse-interface laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the 1D profiles and dump (z, θ0, θ0′, θ1) with the surface
    /// tension σ as CSV.
    Profile {
        /// Potential name (`quartic`) unless explicit coefficients are given.
        #[arg(long, default_value = "quartic")]
        potential: String,
        /// Ascending polynomial coefficients of F, comma-separated.
        #[arg(long)]
        coefficients: Option<String>,
        #[arg(long, default_value = "profile.csv")]
        out: PathBuf,
    },
    /// Check the structural assumptions on the double-well potential.
    ValidatePotential {
        #[arg(long, default_value = "quartic")]
        potential: String,
        #[arg(long)]
        coefficients: Option<String>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Run the Cahn-Larché evolution from a JSON config.
    Simulate { config: PathBuf },
    /// Build approximate solutions over an ε-sweep and meter their residuals.
    Residual { config: PathBuf },
    /// Spectral coercivity sweep (Rayleigh-quotient minimum per ε).
    Spectral { config: PathBuf },
    /// Compare two raw field dumps (L², L³, max norms of the difference).
    Compare { a: PathBuf, b: PathBuf },
    /// Fit convergence orders to the columns of a sweep CSV.
    Rates { config: PathBuf },
}

fn potential_from(name: &str, coefficients: &Option<String>) -> Result<DoubleWell, String> {
    if let Some(list) = coefficients {
        let coeffs: Result<Vec<f64>, _> = list.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let coeffs = coeffs.map_err(|e| format!("bad coefficient list: {e}"))?;
        return DoubleWell::from_coefficients(coeffs, 0.0, (-1.5, 1.5)).map_err(|e| e.to_string());
    }
    match name {
        "quartic" => Ok(DoubleWell::quartic()),
        other => Err(format!("unknown potential {other:?} (try `quartic` or --coefficients)")),
    }
}

/// Module errors exit 1; configuration errors exit 2.
fn exit_for(err: larche_core::Error) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        larche_core::Error::Config(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn config_or_exit<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, ExitCode> {
    config::load(path).map_err(|msg| {
        eprintln!("error: {msg}");
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Profile { potential, coefficients, out } => {
            match potential_from(potential, coefficients) {
                Ok(p) => commands::profile(p, out),
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(2);
                }
            }
        }
        Command::ValidatePotential { potential, coefficients, samples } => {
            match potential_from(potential, coefficients) {
                Ok(p) => match commands::validate_potential(p, *samples) {
                    Ok(true) => Ok(()),
                    Ok(false) => {
                        eprintln!("error: potential violates structural assumptions");
                        return ExitCode::from(1);
                    }
                    Err(e) => Err(e),
                },
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(2);
                }
            }
        }
        Command::Simulate { config } => match config_or_exit(config) {
            Ok(cfg) => commands::simulate(&cfg),
            Err(code) => return code,
        },
        Command::Residual { config } => match config_or_exit(config) {
            Ok(cfg) => commands::residual(&cfg),
            Err(code) => return code,
        },
        Command::Spectral { config } => match config_or_exit(config) {
            Ok(cfg) => commands::spectral(&cfg),
            Err(code) => return code,
        },
        Command::Compare { a, b } => commands::compare(a, b),
        Command::Rates { config } => match config_or_exit(config) {
            Ok(cfg) => commands::rates(&cfg),
            Err(code) => return code,
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(e),
    }
}
