//! Conservative, linearly-stabilized semi-implicit time stepping for the
//! coupled concentration/elasticity evolution on a square with homogeneous
//! Neumann conditions for `c` and `μ` and clamped displacement.
//!
//! One step solves, in the cosine basis that diagonalizes the mirrored
//! five-point Laplacian,
//!
//! ```text
//! μ^{n+1} = -ε Δ_h c^{n+1} + (s/ε)(c^{n+1} - c^n) + ε⁻¹ f(c^n) + W_{,c}(c^n, E(u^n))
//! (c^{n+1} - c^n)/τ = Δ_h μ^{n+1}
//! ```
//!
//! then re-equilibrates the displacement at `c^{n+1}` (quasi-static
//! elasticity, lagged one step in the chemical potential).

use crate::elasticity::{
    elastic_energy, wc_field, DisplacementProblem, ElasticState, ElasticityTensor, Sym2,
};
use crate::error::{Error, Result};
use crate::geometry::{Shape, SignedDistanceMap};
use crate::grid::{DctPlan, Field, Grid2D};
use crate::potential::DoubleWell;
use crate::profile::ProfileTable;

/// Elastic constitutive data entering the coupled evolution.
#[derive(Clone, Debug)]
pub struct ElasticCoupling {
    pub tensor: ElasticityTensor,
    pub estar: Sym2,
}

#[derive(Clone, Debug)]
pub struct PFConfig {
    pub epsilon: f64,
    /// Time step; default scale is ε³.
    pub tau: f64,
    /// Linear stabilization shift `s`; needs `s ≥ max f'` on the invariant
    /// range for monotone energy decay (quartic: 14).
    pub stabilization: f64,
    pub cg_tol: f64,
    pub elasticity: Option<ElasticCoupling>,
    pub end_time: f64,
}

impl PFConfig {
    /// Plain Cahn-Hilliard defaults at a given interface width.
    pub fn cahn_hilliard(epsilon: f64) -> Self {
        PFConfig {
            epsilon,
            tau: epsilon.powi(3),
            stabilization: 14.0,
            cg_tol: 1e-10,
            elasticity: None,
            end_time: 0.0,
        }
    }

    pub fn validate(&self, grid: &Grid2D) -> Result<()> {
        if !(self.epsilon > 0.0 && self.tau > 0.0) {
            return Err(Error::Precondition("epsilon and tau must be positive".into()));
        }
        if self.stabilization < 0.0 || self.cg_tol <= 0.0 || self.end_time < 0.0 {
            return Err(Error::Precondition("invalid stabilization/cg_tol/end_time".into()));
        }
        if self.epsilon < 2.0 * grid.h {
            return Err(Error::Precondition(format!(
                "epsilon = {} under-resolved: need epsilon >= 2h = {}",
                self.epsilon,
                2.0 * grid.h
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PFState {
    pub c: Field,
    pub mu: Field,
    pub u: ElasticState,
    pub time: f64,
}

impl PFState {
    /// Quiescent state with a prescribed concentration.
    pub fn from_concentration(grid: &Grid2D, c: Field) -> Result<PFState> {
        grid.check_shape(&c)?;
        Ok(PFState {
            c,
            mu: grid.zeros(),
            u: ElasticState { ux: grid.zeros(), uy: grid.zeros() },
            time: 0.0,
        })
    }

    pub fn check(&self, grid: &Grid2D) -> Result<()> {
        grid.check_shape(&self.c)?;
        grid.check_shape(&self.mu)?;
        grid.check_shape(&self.u.ux)?;
        grid.check_shape(&self.u.uy)?;
        for (name, f) in [("c", &self.c), ("mu", &self.mu), ("ux", &self.u.ux), ("uy", &self.u.uy)]
        {
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(name.into()));
            }
        }
        let max_c = self.c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if max_c > 1.5 {
            return Err(Error::Precondition(format!("blow-up tripwire: max|c| = {max_c} > 1.5")));
        }
        if self.time < 0.0 {
            return Err(Error::Precondition("negative time".into()));
        }
        Ok(())
    }
}

/// Smooth cutoff: 1 on |z| ≤ 1/2, 0 on |z| ≥ 1, monotone quintic between
/// (so `z ζ'(z) ≤ 0` everywhere).
pub fn cutoff_zeta(z: f64) -> f64 {
    let a = z.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        let t = 2.0 * (a - 0.5);
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// Analytic Laplacian of the signed distance at a point with distance `d`,
/// from the interface curvature at the projection: `Δd = k/(1 + d·k)` with
/// `k = -κ` evaluated at the projected point.
pub fn laplacian_distance(map: &SignedDistanceMap, d: f64, proj: (f64, f64)) -> Result<f64> {
    let k = match &map.shape {
        Shape::Circle { r, .. } => 1.0 / r,
        Shape::Ellipse { center, a, b } => {
            let (px, py) = (proj.0 - center.0, proj.1 - center.1);
            let theta = (py / b).atan2(px / a);
            let (s, c) = (theta.sin(), theta.cos());
            a * b / (a * a * s * s + b * b * c * c).powf(1.5)
        }
        Shape::Polyline(_) => {
            return Err(Error::Precondition(
                "analytic distance Laplacian needs a circle or ellipse".into(),
            ))
        }
    };
    let den = 1.0 + d * k;
    if den <= 0.0 {
        return Err(Error::Precondition("point beyond the center of curvature".into()));
    }
    Ok(k / den)
}

/// Glued initial concentration: profile in a tube of half-width δ around the
/// interface, pure phases ±1 outside, bridged by the cutoff. With
/// `first_order` the inner expansion includes the curvature correction
/// `ε·Δd|_Γ·θ1(d/ε)`, with the distance Laplacian frozen at the projected
/// point (where it equals the interface curvature): the `θ0'·Δd` term of the
/// residual is then cancelled up to `O(ε)` across the whole tube, not just
/// on the interface itself.
pub fn init_glued(
    grid: &Grid2D,
    map: &SignedDistanceMap,
    epsilon: f64,
    delta: f64,
    theta0: &ProfileTable,
    theta1: Option<&ProfileTable>,
    first_order: bool,
) -> Result<Field> {
    if delta < 4.0 * epsilon {
        return Err(Error::Precondition(format!("delta = {delta} below 4 epsilon = {}", 4.0 * epsilon)));
    }
    if first_order && theta1.is_none() {
        return Err(Error::Precondition("first-order gluing needs theta1".into()));
    }
    // The gluing tube (where the cutoff is active, |d| < δ) must not touch
    // the boundary, so the glued field is exactly ±1 on ∂Ω.
    let n = grid.n;
    for idx in 0..n {
        for (x, y) in [
            (grid.x(idx), 0.0),
            (grid.x(idx), grid.length),
            (0.0, grid.x(idx)),
            (grid.length, grid.x(idx)),
        ] {
            let (d, _) = map.eval(x, y)?;
            if d.abs() <= delta {
                return Err(Error::Precondition(format!(
                    "gluing tube touches the boundary (|d| = {} at ({x}, {y}))",
                    d.abs()
                )));
            }
        }
    }

    let mut c = grid.zeros();
    for i in 0..n {
        for j in 0..n {
            let (d, proj) = map.eval(grid.x(i), grid.x(j))?;
            let zeta = cutoff_zeta(d / delta);
            let outer = if d >= 0.0 { 1.0 } else { -1.0 };
            let mut val = (1.0 - zeta) * outer;
            if zeta > 0.0 {
                let mut inner = theta0.eval(d / epsilon);
                if first_order {
                    let dd = laplacian_distance(map, 0.0, proj)?;
                    inner += epsilon * dd * theta1.unwrap().eval(d / epsilon);
                }
                val += zeta * inner;
            }
            c[[i, j]] = val;
        }
    }
    Ok(c)
}

/// Per-step diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct StepRecord {
    pub t: f64,
    pub mass: f64,
    pub e1: f64,
    pub e2: f64,
    pub max_abs_c: f64,
}

impl StepRecord {
    pub fn total_energy(&self) -> f64 {
        self.e1 + self.e2
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Sampled states; always contains the initial and final state.
    pub frames: Vec<PFState>,
    /// One record per step boundary, starting with the initial state.
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn final_state(&self) -> &PFState {
        self.frames.last().expect("trajectory has at least the initial frame")
    }
}

/// Owns the transform plan and steps states forward.
pub struct Stepper<'a> {
    plan: DctPlan,
    pub config: &'a PFConfig,
    pub potential: &'a DoubleWell,
}

impl<'a> Stepper<'a> {
    pub fn new(grid: Grid2D, config: &'a PFConfig, potential: &'a DoubleWell) -> Result<Self> {
        config.validate(&grid)?;
        Ok(Stepper { plan: DctPlan::new(grid), config, potential })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.plan.grid
    }

    /// Explicit part of the chemical potential: `ε⁻¹ f(c) + W_{,c}(c, E(u))`.
    fn explicit_term(&self, state: &PFState) -> Field {
        let g = self.grid();
        let eps = self.config.epsilon;
        let mut ghat = state.c.mapv(|v| self.potential.f(v) / eps);
        if let Some(el) = &self.config.elasticity {
            ghat += &wc_field(g, &state.c, &el.tensor, &el.estar, &state.u);
        }
        ghat
    }

    pub fn step(&self, state: &PFState) -> Result<PFState> {
        let g = self.grid();
        state.check(g)?;
        let eps = self.config.epsilon;
        let tau = self.config.tau;
        let s = self.config.stabilization;

        let ghat = self.explicit_term(state);
        let mut chat = self.plan.forward(&state.c);
        let ghat_hat = self.plan.forward(&ghat);
        for k in 0..g.n {
            for l in 0..g.n {
                let lam = self.plan.lambda5[k] + self.plan.lambda5[l];
                if k == 0 && l == 0 {
                    // Zero mode untouched: exact conservation of the mean.
                    continue;
                }
                let den = 1.0 + tau * eps * lam * lam + tau * (s / eps) * lam;
                chat[[k, l]] =
                    ((1.0 + tau * (s / eps) * lam) * chat[[k, l]] - tau * lam * ghat_hat[[k, l]])
                        / den;
            }
        }
        let c_new = self.plan.inverse(&chat);
        let mu = -eps * &g.laplacian5(&c_new) + (s / eps) * &(&c_new - &state.c) + &ghat;

        let u_new = if let Some(el) = &self.config.elasticity {
            let problem = DisplacementProblem {
                grid: g,
                tensor: &el.tensor,
                estar: el.estar,
                dirichlet: None,
                body_force: None,
                tol: self.config.cg_tol,
                max_iter: 50 * g.n,
            };
            let c_eval = |x: f64, y: f64| {
                g.sample_bilinear(&c_new, x, y).expect("Gauss point inside the domain")
            };
            let (u, _) = problem.solve(&c_eval, Some(&state.u))?;
            u
        } else {
            state.u.clone()
        };

        let next = PFState { c: c_new, mu, u: u_new, time: state.time + tau };
        next.check(g)?;
        Ok(next)
    }

    /// Ginzburg-Landau and elastic energies by trapezoid/Gauss quadrature.
    pub fn energy(&self, state: &PFState) -> (f64, f64) {
        let g = self.grid();
        let eps = self.config.epsilon;
        let well = state.c.mapv(|v| self.potential.big_f(v));
        let e1 = 0.5 * eps * g.gradient_energy(&state.c) + g.integrate(&well) / eps;
        let e2 = match &self.config.elasticity {
            Some(el) => {
                let c_eval = |x: f64, y: f64| {
                    g.sample_bilinear(&state.c, x, y).expect("Gauss point inside the domain")
                };
                elastic_energy(g, &c_eval, &el.tensor, &el.estar, &state.u)
            }
            None => 0.0,
        };
        (e1, e2)
    }

    fn record(&self, state: &PFState) -> StepRecord {
        let (e1, e2) = self.energy(state);
        StepRecord {
            t: state.time,
            mass: self.grid().mean(&state.c),
            e1,
            e2,
            max_abs_c: state.c.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        }
    }

    /// Step until `end_time`, keeping every `sample_every`-th frame (0 keeps
    /// only the endpoints).
    pub fn run(&self, init: PFState, sample_every: usize) -> Result<Trajectory> {
        let g = self.grid();
        init.check(g)?;
        let n_steps = (self.config.end_time / self.config.tau).round() as usize;
        let mut records = vec![self.record(&init)];
        let mut frames = vec![init.clone()];
        if n_steps == 0 {
            return Ok(Trajectory { frames, records });
        }
        let mut state = init;
        for k in 1..=n_steps {
            state = self.step(&state)?;
            records.push(self.record(&state));
            if sample_every != 0 && k % sample_every == 0 && k != n_steps {
                frames.push(state.clone());
            }
        }
        frames.push(state);
        Ok(Trajectory { frames, records })
    }
}
