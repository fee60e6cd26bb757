//! Serialization of run artifacts: CSV tables for time series, polylines,
//! interface residuals, sweeps, and spectral reports, plus raw little-endian
//! f64 grid dumps with a JSON sidecar. All text output uses the shortest
//! round-trip float representation, so files are byte-reproducible.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::InterfacePolyline;
use crate::grid::{Field, Grid2D};
use crate::phasefield::StepRecord;
use crate::sharpref::GibbsThomsonSample;
use crate::spectral::UniformityRow;

/// Time series CSV with header `t,mass,E1,E2,Etot,max_abs_c`.
pub fn write_time_series<W: Write>(out: &mut W, records: &[StepRecord]) -> Result<()> {
    writeln!(out, "t,mass,E1,E2,Etot,max_abs_c")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.t,
            r.mass,
            r.e1,
            r.e2,
            r.total_energy(),
            r.max_abs_c
        )?;
    }
    Ok(())
}

/// Polyline CSV with header `x,y,nx,ny,kappa,s`.
pub fn write_polyline<W: Write>(out: &mut W, poly: &InterfacePolyline) -> Result<()> {
    writeln!(out, "x,y,nx,ny,kappa,s")?;
    for i in 0..poly.len() {
        let (x, y) = poly.points[i];
        let (nx, ny) = poly.normals[i];
        writeln!(
            out,
            "{},{},{},{},{},{}",
            x, y, nx, ny, poly.curvature[i], poly.arclengths[i]
        )?;
    }
    Ok(())
}

/// Gibbs-Thomson residual CSV with header
/// `s,x,y,mu_meas,kappa,elastic_term,residual`.
pub fn write_gibbs_thomson<W: Write>(out: &mut W, samples: &[GibbsThomsonSample]) -> Result<()> {
    writeln!(out, "s,x,y,mu_meas,kappa,elastic_term,residual")?;
    for r in samples {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.s, r.x, r.y, r.mu_measured, r.kappa, r.elastic_term, r.residual
        )?;
    }
    Ok(())
}

/// One row of the ε-sweep table.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub norm_r_a: f64,
    pub norm_s_a: f64,
    pub norm_mass: f64,
    pub err_mu: f64,
    pub err_c: f64,
}

/// Sweep CSV with header `epsilon,norm_rA,norm_sA,norm_mass,err_mu,err_c`.
pub fn write_sweep<W: Write>(out: &mut W, rows: &[SweepRow]) -> Result<()> {
    writeln!(out, "epsilon,norm_rA,norm_sA,norm_mass,err_mu,err_c")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.epsilon, r.norm_r_a, r.norm_s_a, r.norm_mass, r.err_mu, r.err_c
        )?;
    }
    Ok(())
}

/// Spectral CSV with header `epsilon,lambda_min,C`.
pub fn write_spectral<W: Write>(out: &mut W, rows: &[UniformityRow]) -> Result<()> {
    writeln!(out, "epsilon,lambda_min,C")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.epsilon, r.lambda_min, r.c)?;
    }
    Ok(())
}

/// JSON sidecar accompanying a raw grid dump.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldMeta {
    pub nx: usize,
    pub ny: usize,
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
    pub time: f64,
    pub field: String,
}

fn sidecar_path(raw: &Path) -> PathBuf {
    let mut name = raw.file_name().unwrap_or_default().to_os_string();
    name.push(".json");
    raw.with_file_name(name)
}

/// Dump a grid field as raw little-endian f64, row-major, writing the JSON
/// sidecar `<path>.json` next to it.
pub fn write_field(path: &Path, grid: &Grid2D, field: &Field, name: &str, time: f64) -> Result<()> {
    grid.check_shape(field)?;
    let meta = FieldMeta {
        nx: grid.n,
        ny: grid.n,
        lx: grid.length,
        ly: grid.length,
        time,
        field: name.to_string(),
    };
    let mut raw = BufWriter::new(File::create(path)?);
    for row in field.rows() {
        for &v in row {
            raw.write_all(&v.to_le_bytes())?;
        }
    }
    raw.flush()?;
    let sidecar = File::create(sidecar_path(path))?;
    serde_json::to_writer_pretty(BufWriter::new(sidecar), &meta)
        .map_err(|e| Error::Config(format!("sidecar serialization failed: {e}")))?;
    Ok(())
}

/// Read back a raw dump and its sidecar; the byte length must match the
/// sidecar shape exactly.
pub fn read_field(path: &Path) -> Result<(FieldMeta, Field)> {
    let sidecar = File::open(sidecar_path(path))?;
    let meta: FieldMeta = serde_json::from_reader(BufReader::new(sidecar))
        .map_err(|e| Error::Config(format!("sidecar parse failed: {e}")))?;
    if meta.nx != meta.ny || meta.lx != meta.ly {
        return Err(Error::Config(format!(
            "non-square dump {}x{} ({} x {}) is not supported",
            meta.nx, meta.ny, meta.lx, meta.ly
        )));
    }
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    let expect = meta.nx * meta.ny * 8;
    if bytes.len() != expect {
        return Err(Error::Config(format!(
            "raw dump {} has {} bytes, sidecar implies {expect}",
            path.display(),
            bytes.len()
        )));
    }
    let mut field = Field::zeros((meta.nx, meta.ny));
    for (k, chunk) in bytes.chunks_exact(8).enumerate() {
        field[[k / meta.ny, k % meta.ny]] = f64::from_le_bytes(chunk.try_into().unwrap());
    }
    Ok((meta, field))
}
