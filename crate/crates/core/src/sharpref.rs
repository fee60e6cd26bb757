//! Sharp-interface reference values and residual meters: the radial closed
//! form of the limiting Hele-Shaw problem for a single circle under Neumann
//! conditions, plus pointwise Gibbs-Thomson and Stefan-condition residuals
//! measured on extracted interfaces.

use crate::elasticity::{elastic_jump, ElasticityTensor, RadialMisfit};
use crate::error::{Error, Result};
use crate::geometry::{one_sided_sample, InterfacePolyline};
use crate::grid::Grid2D;
use crate::phasefield::{ElasticCoupling, PFState};

/// Closed-form reference for a circle of radius R: the chemical potential is
/// a single global constant and the interface is stationary.
#[derive(Clone, Copy, Debug)]
pub struct RadialReference {
    pub r: f64,
    pub mu_value: f64,
    pub elastic_jump: f64,
    pub velocity: f64,
}

/// The sharp chemical potential is harmonic and radially symmetric on each
/// side, bounded at the center, with zero Neumann data outside: both sides
/// are constants, continuity makes them one constant fixed by the
/// Gibbs-Thomson relation, and the vanishing flux jump gives velocity zero.
///
/// With elasticity the jump term comes from the disk-geometry radial misfit
/// solution; the misfit radii must match `r` and `r_out`.
pub fn radial_reference(
    r: f64,
    r_out: f64,
    sigma: f64,
    elastic: Option<&RadialMisfit>,
) -> Result<RadialReference> {
    if !(0.0 < r && r < r_out) {
        return Err(Error::Precondition(format!("need 0 < R = {r} < Rout = {r_out}")));
    }
    if sigma <= 0.0 {
        return Err(Error::Precondition("surface tension must be positive".into()));
    }
    let kappa = -1.0 / r;
    let jump = match elastic {
        Some(misfit) => {
            if (misfit.r_in - r).abs() > 1e-14 || (misfit.r_out - r_out).abs() > 1e-14 {
                return Err(Error::Precondition("misfit radii do not match the reference".into()));
            }
            let tensor = ElasticityTensor::isotropic(misfit.lambda, misfit.mu)?;
            misfit.solve()?.jump(&tensor)
        }
        None => 0.0,
    };
    Ok(RadialReference { r, mu_value: sigma * kappa + jump, elastic_jump: jump, velocity: 0.0 })
}

/// One interface point of a Gibbs-Thomson residual scan.
#[derive(Clone, Copy, Debug)]
pub struct GibbsThomsonSample {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub mu_measured: f64,
    pub kappa: f64,
    pub elastic_term: f64,
    pub residual: f64,
}

/// Pointwise residual of `μ = σκ + elastic jump` on an extracted interface.
///
/// `μ` is sampled bilinearly at the interface point, κ comes from the
/// polyline, and the elastic term from one-sided samples of `∇u` on both
/// sides at distance `offset` along the normal.
pub fn gibbs_thomson_residual(
    grid: &Grid2D,
    state: &PFState,
    poly: &InterfacePolyline,
    sigma: f64,
    epsilon: f64,
    elastic: Option<&ElasticCoupling>,
    offset: f64,
) -> Result<Vec<GibbsThomsonSample>> {
    if offset < (2.0 * epsilon).max(3.0 * grid.h) {
        return Err(Error::Precondition(format!(
            "offset {offset} below max(2 epsilon, 3h) = {}",
            (2.0 * epsilon).max(3.0 * grid.h)
        )));
    }
    state.check(grid)?;
    let gradients = elastic.map(|_| {
        let (uxx, uxy) = grid.gradient(&state.u.ux);
        let (uyx, uyy) = grid.gradient(&state.u.uy);
        [uxx, uxy, uyx, uyy]
    });

    let mut out = Vec::with_capacity(poly.len());
    for k in 0..poly.len() {
        let p = poly.points[k];
        let nu = poly.normals[k];
        let kappa = poly.curvature[k];
        let mu_measured = grid.sample_bilinear(&state.mu, p.0, p.1)?;
        let elastic_term = match (elastic, &gradients) {
            (Some(el), Some(g)) => {
                let mut plus = [[0.0; 2]; 2];
                let mut minus = [[0.0; 2]; 2];
                for (idx, comp) in g.iter().enumerate() {
                    let (pv, mv, _) = one_sided_sample(grid, comp, p, nu, offset)?;
                    plus[idx / 2][idx % 2] = pv;
                    minus[idx / 2][idx % 2] = mv;
                }
                // The plus side (along +ν) is the c = +1 phase.
                elastic_jump(&el.tensor, &el.estar, &plus, &minus, 1.0, -1.0, nu)
            }
            _ => 0.0,
        };
        let residual = mu_measured - sigma * kappa - elastic_term;
        out.push(GibbsThomsonSample {
            s: poly.arclengths[k],
            x: p.0,
            y: p.1,
            mu_measured,
            kappa,
            elastic_term,
            residual,
        });
    }
    Ok(out)
}

/// One interface point of a Stefan-condition residual scan.
#[derive(Clone, Copy, Debug)]
pub struct StefanSample {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub velocity: f64,
    pub flux_jump: f64,
    pub residual: f64,
}

/// Residual of `V = -½ [∇μ]·ν` between two frames.
///
/// The normal velocity is measured by nearest-point matching of the two
/// contours over the elapsed time; the flux jump by one-sided normal
/// derivatives of `μ` on the earlier frame. The residual is `V + ½·jump`.
pub fn stefan_residual(
    grid: &Grid2D,
    earlier: (&PFState, &InterfacePolyline),
    later: (&PFState, &InterfacePolyline),
    offset: f64,
) -> Result<Vec<StefanSample>> {
    let (state_a, poly_a) = earlier;
    let (state_b, poly_b) = later;
    let dt = state_b.time - state_a.time;
    if dt < 0.0 {
        return Err(Error::Precondition("frames out of order".into()));
    }
    state_a.check(grid)?;

    let mut out = Vec::with_capacity(poly_a.len());
    for k in 0..poly_a.len() {
        let p = poly_a.points[k];
        let nu = poly_a.normals[k];
        // Nearest counterpart on the later contour.
        let mut best = f64::INFINITY;
        let mut q = p;
        for &cand in &poly_b.points {
            let d2 = (cand.0 - p.0).powi(2) + (cand.1 - p.1).powi(2);
            if d2 < best {
                best = d2;
                q = cand;
            }
        }
        if best.sqrt() > 5.0 * grid.h {
            return Err(Error::InterfaceTopology(format!(
                "contour matching ambiguity: nearest counterpart at distance {}",
                best.sqrt()
            )));
        }
        let velocity = if dt == 0.0 {
            0.0
        } else {
            ((q.0 - p.0) * nu.0 + (q.1 - p.1) * nu.1) / dt
        };
        let (_, _, flux_jump) = one_sided_sample(grid, &state_a.mu, p, nu, offset)?;
        out.push(StefanSample {
            s: poly_a.arclengths[k],
            x: p.0,
            y: p.1,
            velocity,
            flux_jump,
            residual: velocity + 0.5 * flux_jump,
        });
    }
    Ok(out)
}

pub fn max_abs_residual_gt(samples: &[GibbsThomsonSample]) -> f64 {
    samples.iter().fold(0.0_f64, |m, s| m.max(s.residual.abs()))
}

pub fn max_abs_residual_stefan(samples: &[StefanSample]) -> f64 {
    samples.iter().fold(0.0_f64, |m, s| m.max(s.residual.abs()))
}
