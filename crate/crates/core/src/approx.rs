//! Matched-asymptotic approximate solutions at orders 0 and 1, their
//! defining residuals, the admissible-form audit, and the log-log rate fit
//! used by the ε-sweep.

use crate::elasticity::{
    strain_at_nodes, w_c, wc_field, ElasticState, ElasticityTensor, RadialSolution, Sym2,
};
use crate::error::{Error, Result};
use crate::geometry::{Shape, SignedDistanceMap};
use crate::grid::{DctPlan, Field, Grid2D};
use crate::phasefield::{cutoff_zeta, init_glued, laplacian_distance, ElasticCoupling};
use crate::potential::DoubleWell;
use crate::profile::{BridgingFunction, ProfileTable};

#[derive(Clone, Debug)]
pub struct ApproxSolution {
    pub c_a: Field,
    pub mu_a: Field,
    pub u_a: ElasticState,
    pub order: usize,
    pub epsilon: f64,
    pub delta: f64,
}

/// Everything needed to assemble an approximate solution: the interface
/// geometry, the profile tables, the bridging function, and the sharp outer
/// fields (constants for μ on each side, the radial closed form for u).
pub struct BuildInputs<'a> {
    pub map: &'a SignedDistanceMap,
    pub epsilon: f64,
    pub delta: f64,
    pub order: usize,
    pub theta0: &'a ProfileTable,
    pub theta1: Option<&'a ProfileTable>,
    pub eta: &'a BridgingFunction,
    pub mu_plus: f64,
    pub mu_minus: f64,
    /// Sharp displacement; `None` builds a quiescent `u_a`.
    pub radial_u: Option<&'a RadialSolution>,
    pub potential: &'a DoubleWell,
}

/// `W_{,c}` of the sharp radial displacement on the given side at a point
/// relative to the disc center.
fn outer_wc(sol: &RadialSolution, dx: f64, dy: f64, inside: bool, c: f64) -> f64 {
    let tensor = ElasticityTensor::isotropic(sol.cfg.lambda, sol.cfg.mu)
        .expect("moduli validated when the radial problem was solved");
    let estar = Sym2::diag(sol.cfg.theta);
    let r2 = dx * dx + dy * dy;
    let e = if inside || r2 == 0.0 {
        Sym2::diag(sol.a)
    } else {
        Sym2::from_gradient(&sol.gradient(dx, dy, false))
    };
    w_c(&tensor, &estar, c, &e)
}

/// Assemble `c_A`, `μ_A`, `u_A`: profile plus curvature correction in the
/// tube for `c`, side values bridged by `η(d/ε)` inside the cutoff for `μ`,
/// and for `u` the diffuse radial closed form driven by the same inner
/// concentration profile, which keeps `div S = 0` exactly instead of
/// leaving the `C E⋆ ∇c_A` defect of a bridged sharp displacement.
pub fn build(grid: &Grid2D, inp: &BuildInputs) -> Result<ApproxSolution> {
    if inp.order > 1 {
        return Err(Error::Precondition("orders above 1 are not built".into()));
    }
    let mut c_a = init_glued(
        grid,
        inp.map,
        inp.epsilon,
        inp.delta,
        inp.theta0,
        inp.theta1,
        inp.order >= 1,
    )?;

    let center = match (&inp.map.shape, inp.radial_u) {
        (Shape::Circle { center, .. }, _) => *center,
        (_, None) => (0.0, 0.0),
        _ => {
            return Err(Error::Precondition(
                "the radial displacement build needs a circular interface".into(),
            ))
        }
    };

    let diffuse = match inp.radial_u {
        Some(sol) => {
            let cfg = sol.cfg;
            let dist = |x: f64, y: f64| {
                let (dx, dy) = (x - center.0, y - center.1);
                (dx * dx + dy * dy).sqrt()
            };
            let r_max = dist(0.0, 0.0)
                .max(dist(grid.length, 0.0))
                .max(dist(0.0, grid.length))
                .max(dist(grid.length, grid.length))
                .max(cfg.r_out);
            let cmid = 0.5 * (cfg.c_in + cfg.c_out);
            let camp = 0.5 * (cfg.c_out - cfg.c_in);
            // Same inner profile as c_A: θ0 plus, at first order, the
            // curvature correction with Δd frozen on the interface.
            let kappa = if inp.order >= 1 { inp.epsilon / cfg.r_in } else { 0.0 };
            let theta1 = inp.theta1;
            let profile = |r: f64| {
                let z = (r - cfg.r_in) / inp.epsilon;
                let mut c = inp.theta0.eval(z);
                if kappa != 0.0 {
                    c += kappa * theta1.expect("validated by the glued build").eval(z);
                }
                cmid + camp * c
            };
            let dr = (inp.epsilon / 200.0).min(grid.h / 4.0);
            Some(cfg.solve_diffuse(profile, r_max + 4.0 * dr, dr)?)
        }
        None => None,
    };

    let n = grid.n;
    let mut mu_a = grid.zeros();
    let mut ux = grid.zeros();
    let mut uy = grid.zeros();
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (grid.x(i), grid.x(j));
            let (d, _) = inp.map.eval(x, y)?;
            let zeta = cutoff_zeta(d / inp.delta);
            let eta_v = inp.eta.eval(d / inp.epsilon);
            let outer_plus = if d >= 0.0 { 1.0 } else { 0.0 };
            let w_plus = zeta * eta_v + (1.0 - zeta) * outer_plus;
            let w_minus = zeta * (1.0 - eta_v) + (1.0 - zeta) * (1.0 - outer_plus);
            mu_a[[i, j]] = w_plus * inp.mu_plus + w_minus * inp.mu_minus;
            if let Some(diff) = &diffuse {
                let (dx, dy) = (x - center.0, y - center.1);
                let (vx, vy) = diff.displacement(dx, dy)?;
                ux[[i, j]] = vx;
                uy[[i, j]] = vy;
            }
            // First-order outer correction: the outer concentration is not
            // exactly ±1 but ±1 + ε(μ^± - W_{,c}(±1, E(u^±)))/f'(±1), which
            // removes the O(1) defect of the chemical-potential equation
            // away from the tube (and matches the θ1 far field, since
            // Δd·θ1(±∞) = -Δd·σ/f' equals the correction for μ = σκ).
            if inp.order >= 1 {
                let sign = if d >= 0.0 { 1.0 } else { -1.0 };
                let mu_side = if d >= 0.0 { inp.mu_plus } else { inp.mu_minus };
                let wc_side = match inp.radial_u {
                    Some(sol) => {
                        let (dx, dy) = (x - center.0, y - center.1);
                        outer_wc(sol, dx, dy, d < 0.0, sign)
                    }
                    None => 0.0,
                };
                let c1 = (mu_side - wc_side) / inp.potential.f_prime(sign);
                c_a[[i, j]] += (1.0 - zeta) * inp.epsilon * c1;
            }
        }
    }

    Ok(ApproxSolution {
        c_a,
        mu_a,
        u_a: ElasticState { ux, uy },
        order: inp.order,
        epsilon: inp.epsilon,
        delta: inp.delta,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ResidualNorms {
    pub r_l2: f64,
    pub s_l2: f64,
    pub mass_l2: f64,
}

#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// Defect of the chemical-potential equation.
    pub r_a: Field,
    /// Defect of mechanical equilibrium, `div S`.
    pub s_a: (Field, Field),
    /// `Δ μ_A` (stationary shapes have `∂t c_A = 0`).
    pub mass_defect: Field,
    pub norms: ResidualNorms,
}

/// Residuals of the defining equations. The Laplacian of `c_A` is metered
/// spectrally (exact on the cosine content) so the O(h²/ε³) stencil error of
/// the five-point operator does not drown the O(ε) terms under study.
pub fn residuals(
    plan: &DctPlan,
    a: &ApproxSolution,
    potential: &DoubleWell,
    elastic: Option<&ElasticCoupling>,
) -> Result<ResidualReport> {
    let grid = &plan.grid;
    grid.check_shape(&a.c_a)?;
    grid.check_shape(&a.mu_a)?;
    let eps = a.epsilon;

    let lap_c = plan.laplacian_spectral(&a.c_a);
    let f_term = a.c_a.mapv(|v| potential.f(v) / eps);
    let mut r_a = &a.mu_a + &(eps * &lap_c) - &f_term;
    let mut s_a = (grid.zeros(), grid.zeros());
    if let Some(el) = elastic {
        r_a -= &wc_field(grid, &a.c_a, &el.tensor, &el.estar, &a.u_a);
        // Nodal stress, then its divergence by centered differences.
        let (exx, eyy, exy) = strain_at_nodes(grid, &a.u_a);
        let mut sxx = grid.zeros();
        let mut syy = grid.zeros();
        let mut sxy = grid.zeros();
        for i in 0..grid.n {
            for j in 0..grid.n {
                let e = Sym2 {
                    xx: exx[[i, j]],
                    yy: eyy[[i, j]],
                    xy: exy[[i, j]],
                };
                let s = crate::elasticity::stress(&el.tensor, &el.estar, a.c_a[[i, j]], &e);
                sxx[[i, j]] = s.xx;
                syy[[i, j]] = s.yy;
                sxy[[i, j]] = s.xy;
            }
        }
        let (sxx_x, _) = grid.gradient(&sxx);
        let (sxy_x, sxy_y) = grid.gradient(&sxy);
        let (_, syy_y) = grid.gradient(&syy);
        s_a = (&sxx_x + &sxy_y, &sxy_x + &syy_y);
    }
    let mass_defect = plan.laplacian_spectral(&a.mu_a);

    let norms = ResidualNorms {
        r_l2: grid.norm_l2(&r_a),
        s_l2: (grid.norm_l2(&s_a.0).powi(2) + grid.norm_l2(&s_a.1).powi(2)).sqrt(),
        mass_l2: grid.norm_l2(&mass_defect),
    };
    Ok(ResidualReport { r_a, s_a, mass_defect, norms })
}

#[derive(Clone, Copy, Debug)]
pub struct StructureReport {
    /// sup of the curvature coefficient multiplying `ε θ1`.
    pub sup_p: f64,
    /// sup of `ε/(ε+|d|)·|q|`, the weighted second-order leftover.
    pub sup_q_weighted: f64,
    /// sup of the tangential gradient of the built field.
    pub sup_tangential: f64,
    /// `f'` at the outer values.
    pub min_fprime_outer: f64,
    pub c_star: f64,
    pub pass: bool,
}

/// Audit of the admissible form: the built field must decompose as
/// `ζ(θ0 + ε p θ1 + ε² q)` plus outer phases, with `p`, the weighted `q`,
/// and the tangential gradient uniformly bounded, and `f'` coercive at the
/// outer values.
pub fn structure_check(
    grid: &Grid2D,
    map: &SignedDistanceMap,
    a: &ApproxSolution,
    theta0: &ProfileTable,
    theta1: &ProfileTable,
    potential: &DoubleWell,
    c_star: f64,
) -> Result<StructureReport> {
    if a.order < 1 {
        return Err(Error::Precondition("structure check needs an order-1 build".into()));
    }
    let eps = a.epsilon;
    let n = grid.n;
    let (gx, gy) = grid.gradient(&a.c_a);
    // Outer phase values of this build (±1 plus the first-order correction).
    let outer_plus = a.c_a[[0, 0]];
    let outer_minus = a.c_a[[n / 2, n / 2]];

    let mut sup_p = 0.0_f64;
    let mut sup_q = 0.0_f64;
    let mut sup_tan = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (grid.x(i), grid.x(j));
            let (d, proj) = map.eval(x, y)?;
            let zeta = cutoff_zeta(d / a.delta);
            if zeta < 0.5 {
                continue;
            }
            // p is the curvature coefficient at the projected point.
            let p = laplacian_distance(map, 0.0, proj)?;
            sup_p = sup_p.max(p.abs());

            let z = d / eps;
            let outer = if d >= 0.0 { outer_plus } else { outer_minus };
            let modeled = zeta * (theta0.eval(z) + eps * p * theta1.eval(z))
                + (1.0 - zeta) * outer;
            let q = (a.c_a[[i, j]] - modeled) / (zeta * eps * eps);
            sup_q = sup_q.max(eps / (eps + d.abs()) * q.abs());

            // Tangential part of the gradient relative to ν = ∇d.
            let (nx, ny) = map.gradient(x, y)?;
            let norm = (nx * nx + ny * ny).sqrt();
            let (nx, ny) = (nx / norm, ny / norm);
            let dot = gx[[i, j]] * nx + gy[[i, j]] * ny;
            let tx = gx[[i, j]] - dot * nx;
            let ty = gy[[i, j]] - dot * ny;
            sup_tan = sup_tan.max((tx * tx + ty * ty).sqrt());
        }
    }
    // Outer values sit in the corners, far from any admissible tube.
    let fp_corner = potential.f_prime(a.c_a[[0, 0]]);
    let fp_center = potential.f_prime(a.c_a[[n / 2, n / 2]]);
    let min_fp = fp_corner.min(fp_center);

    let pass = sup_p <= c_star
        && sup_q <= c_star
        && sup_tan <= c_star
        && min_fp >= 1.0 / c_star;
    Ok(StructureReport {
        sup_p,
        sup_q_weighted: sup_q,
        sup_tangential: sup_tan,
        min_fprime_outer: min_fp,
        c_star,
        pass,
    })
}

/// Least-squares slope and constant of `error ≈ constant · ε^order`.
pub fn rate_fit(epsilons: &[f64], errors: &[f64]) -> Result<(f64, f64)> {
    if epsilons.len() < 3 || epsilons.len() != errors.len() {
        return Err(Error::Precondition("need at least 3 matching samples".into()));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("epsilons must be strictly decreasing".into()));
    }
    if !epsilons.iter().chain(errors.iter()).all(|&v| v.is_finite() && v > 0.0) {
        return Err(Error::Precondition("inputs must be positive and finite".into()));
    }
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|v| v * v).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    Ok((slope, intercept.exp()))
}
