//! JSON run configurations for the file-driven subcommands. Schema errors
//! (unreadable file, bad JSON, unknown fields, out-of-range values caught at
//! parse level) map to exit code 2; everything downstream is a module error
//! (exit 1).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Shape of the initial interface.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapeConfig {
    Circle { center: (f64, f64), r: f64 },
    Ellipse { center: (f64, f64), a: f64, b: f64 },
}

/// Isotropic elastic coupling with dilational misfit `E⋆ = ϑ Id`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticConfig {
    pub lambda: f64,
    pub mu: f64,
    pub theta: f64,
}

fn default_length() -> f64 {
    1.0
}

fn default_thread_count() -> usize {
    1
}

fn default_order() -> usize {
    1
}

fn default_sample_every() -> usize {
    100
}

fn default_gamma1() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub grid_n: usize,
    #[serde(default = "default_length")]
    pub length: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Time step; defaults to ε³.
    #[serde(default)]
    pub tau: Option<f64>,
    pub end_time: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    pub shape: ShapeConfig,
    /// Gluing order of the initial data (0 or 1).
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub elasticity: Option<ElasticConfig>,
    pub output_dir: PathBuf,
    #[serde(default = "default_thread_count")]
    pub thread_count: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualConfig {
    /// Strictly decreasing ε values.
    pub epsilons: Vec<f64>,
    pub grid_n: usize,
    #[serde(default = "default_length")]
    pub length: f64,
    pub radius: f64,
    #[serde(default)]
    pub center: Option<(f64, f64)>,
    pub delta: f64,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub elasticity: Option<ElasticConfig>,
    /// Simulated horizon for the μ/c error columns; 0 skips the runs and
    /// reports build-time errors only.
    #[serde(default)]
    pub end_time: f64,
    pub output_dir: PathBuf,
    #[serde(default = "default_thread_count")]
    pub thread_count: usize,
    #[serde(default)]
    pub seed: u64,
}

/// One (ε, grid) pair of the spectral sweep; the grid must resolve the
/// profile.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralRow {
    pub epsilon: f64,
    pub grid_n: usize,
}

/// Which admissible-form field feeds the eigenproblem.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSource {
    /// Planar profile `θ0((x - L/2)/ε)`.
    Profile1d,
    /// Radial order-1 build around a circle.
    Build { r: f64, delta: f64 },
    /// Control case: the spinodal constant φ ≡ 0 that violates the
    /// admissible form.
    Spinodal,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    pub rows: Vec<SpectralRow>,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_gamma1")]
    pub gamma1: f64,
    pub phi: PhiSource,
    pub output_dir: PathBuf,
    #[serde(default = "default_thread_count")]
    pub thread_count: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    /// Sweep CSV produced by `residual` (columns `epsilon,...`).
    pub sweep_csv: PathBuf,
    /// Columns to fit; defaults to every column except `epsilon`.
    #[serde(default)]
    pub columns: Vec<String>,
    pub output_dir: PathBuf,
    #[serde(default = "default_thread_count")]
    pub thread_count: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Load a config file; any failure is a schema error (exit 2).
pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
}
