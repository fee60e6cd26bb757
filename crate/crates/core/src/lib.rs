//! Cahn-Larché diffuse-interface laboratory.
//!
//! The crate couples a conservative Cahn-Hilliard solver to quasi-static
//! linearized elasticity with an eigenstrain misfit, builds matched-asymptotic
//! approximate solutions at orders zero and one, and provides the diagnostic
//! meters (interface-condition residuals, residual norms, spectral lower
//! bounds) used to verify the sharp-interface limit at desk scale.

pub mod approx;
pub mod elasticity;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod phasefield;
pub mod potential;
pub mod profile;
pub mod sharpref;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{Field, Grid2D};
