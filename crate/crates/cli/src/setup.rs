//! Shared assembly of laboratory objects from config values: profiles,
//! signed-distance maps, elastic couplings, sharp radial references, and the
//! run manifest.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use larche_core::elasticity::{ElasticityTensor, RadialMisfit, RadialSolution, Sym2};
use larche_core::geometry::{sdf, Shape, SignedDistanceMap};
use larche_core::phasefield::ElasticCoupling;
use larche_core::potential::DoubleWell;
use larche_core::profile::{make_eta, sigma, solve_theta0, solve_theta1, BridgingFunction, ProfileTable};
use larche_core::sharpref::radial_reference;
use larche_core::Result;

use crate::config::{ElasticConfig, ShapeConfig};

/// Profile half-width and step used by every subcommand.
pub const Z_HALF: f64 = 10.0;
pub const Z_STEP: f64 = 0.005;

/// Profiles and surface tension for a given potential.
pub struct Profiles {
    pub potential: DoubleWell,
    pub theta0: ProfileTable,
    pub theta1: ProfileTable,
    pub eta: BridgingFunction,
    pub sigma: f64,
}

pub fn profiles(potential: DoubleWell) -> Result<Profiles> {
    let theta0 = solve_theta0(&potential, Z_HALF, Z_STEP)?;
    let theta1 = solve_theta1(&potential, &theta0)?;
    let eta = make_eta(&theta0)?;
    let sig = sigma(&theta0);
    Ok(Profiles { potential, theta0, theta1, eta, sigma: sig })
}

pub fn shape_map(shape: &ShapeConfig) -> Result<SignedDistanceMap> {
    let shape = match *shape {
        ShapeConfig::Circle { center, r } => Shape::Circle { center, r },
        ShapeConfig::Ellipse { center, a, b } => Shape::Ellipse { center, a, b },
    };
    sdf(shape)
}

pub fn coupling(e: &ElasticConfig) -> Result<ElasticCoupling> {
    Ok(ElasticCoupling {
        tensor: ElasticityTensor::isotropic(e.lambda, e.mu)?,
        estar: Sym2::diag(e.theta),
    })
}

/// Sharp radial reference for a circle of radius `r` inside a domain of side
/// `length` (disk geometry, inscribed-circle outer radius).
pub struct SharpRadial {
    pub mu_value: f64,
    pub radial_u: Option<RadialSolution>,
}

pub fn sharp_radial(
    r: f64,
    length: f64,
    sigma: f64,
    elastic: Option<&ElasticConfig>,
) -> Result<SharpRadial> {
    let r_out = length / 2.0;
    let misfit = elastic.map(|e| RadialMisfit {
        lambda: e.lambda,
        mu: e.mu,
        theta: e.theta,
        c_in: -1.0,
        c_out: 1.0,
        r_in: r,
        r_out,
    });
    let reference = radial_reference(r, r_out, sigma, misfit.as_ref())?;
    let radial_u = match &misfit {
        Some(m) => Some(m.solve()?),
        None => None,
    };
    Ok(SharpRadial { mu_value: reference.mu_value, radial_u })
}

/// Effective worker count: `LARCHE_THREADS` overrides the config value.
pub fn thread_count(configured: usize) -> Result<usize> {
    match std::env::var("LARCHE_THREADS") {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| larche_core::Error::Config(format!("LARCHE_THREADS = {v:?} is not a positive integer"))),
        Err(_) => Ok(configured.max(1)),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    thread_count: usize,
    wall_time_seconds: f64,
    outputs: &'a [String],
    config: &'a serde_json::Value,
}

/// Write `manifest.json` next to the outputs.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    config: &serde_json::Value,
    threads: usize,
    started: Instant,
    outputs: &[String],
) -> Result<()> {
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        thread_count: threads,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        outputs,
        config,
    };
    let file = std::fs::File::create(dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &manifest)
        .map_err(|e| larche_core::Error::Config(format!("manifest serialization failed: {e}")))?;
    Ok(())
}
