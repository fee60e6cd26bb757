//! Quasi-static linearized elasticity with a concentration-proportional
//! eigenstrain (stress-free strain) `E⋆ c`.
//!
//! The displacement solve is a bilinear (Q1) finite-element discretization on
//! the grid cells, 2×2 Gauss quadrature, matrix-free Jacobi-preconditioned CG.
//! A radially symmetric closed form (misfitting disc in a clamped annulus)
//! serves as reference solution, and the module exposes the interfacial jump
//! term entering the elastic Gibbs-Thomson condition.

use ndarray::arr2;
use ndarray_linalg::Eigh;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};

/// Symmetric 2×2 tensor, stored as (xx, yy, xy).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym2 {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl Sym2 {
    pub fn diag(v: f64) -> Self {
        Sym2 { xx: v, yy: v, xy: 0.0 }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Frobenius pairing `A : B` (off-diagonal counted twice).
    pub fn ddot(&self, other: &Sym2) -> f64 {
        self.xx * other.xx + self.yy * other.yy + 2.0 * self.xy * other.xy
    }

    pub fn scale(&self, s: f64) -> Sym2 {
        Sym2 { xx: s * self.xx, yy: s * self.yy, xy: s * self.xy }
    }

    pub fn sub(&self, other: &Sym2) -> Sym2 {
        Sym2 { xx: self.xx - other.xx, yy: self.yy - other.yy, xy: self.xy - other.xy }
    }

    /// Symmetric part of a displacement gradient `[[∂x u1, ∂y u1], [∂x u2, ∂y u2]]`.
    pub fn from_gradient(g: &[[f64; 2]; 2]) -> Sym2 {
        Sym2 { xx: g[0][0], yy: g[1][1], xy: 0.5 * (g[0][1] + g[1][0]) }
    }
}

/// Fourth-order elasticity tensor acting on symmetric 2×2 tensors, stored as
/// its action on the (xx, yy, xy) components.
#[derive(Clone, Debug)]
pub struct ElasticityTensor {
    /// `rows[k]` gives component k of `C:E` as coefficients of (Exx, Eyy, Exy).
    rows: [[f64; 3]; 3],
    pub lambda: f64,
    pub mu: f64,
}

impl ElasticityTensor {
    /// Isotropic tensor `C:E = λ tr(E) Id + 2μ E`.
    pub fn isotropic(lambda: f64, mu: f64) -> Result<Self> {
        if mu <= 0.0 || lambda + mu <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "isotropic tensor needs mu > 0 and lambda + mu > 0, got lambda = {lambda}, mu = {mu}"
            )));
        }
        Ok(ElasticityTensor {
            rows: [
                [lambda + 2.0 * mu, lambda, 0.0],
                [lambda, lambda + 2.0 * mu, 0.0],
                [0.0, 0.0, 2.0 * mu],
            ],
            lambda,
            mu,
        })
    }

    /// General tensor from a symmetric Voigt matrix acting on engineering
    /// strain `(Exx, Eyy, 2Exy)`.
    pub fn from_voigt(m: [[f64; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in 0..i {
                if (m[i][j] - m[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(
                        "Voigt matrix must be symmetric (major symmetry)".into(),
                    ));
                }
            }
        }
        let t = ElasticityTensor {
            rows: [
                [m[0][0], m[0][1], 2.0 * m[0][2]],
                [m[1][0], m[1][1], 2.0 * m[1][2]],
                [m[2][0], m[2][1], 2.0 * m[2][2]],
            ],
            lambda: f64::NAN,
            mu: f64::NAN,
        };
        if t.c2()? <= 0.0 {
            return Err(Error::InvalidArgument("Voigt matrix is not positive definite".into()));
        }
        Ok(t)
    }

    pub fn apply(&self, e: &Sym2) -> Sym2 {
        let v = [e.xx, e.yy, e.xy];
        let dot = |r: &[f64; 3]| r[0] * v[0] + r[1] * v[1] + r[2] * v[2];
        Sym2 { xx: dot(&self.rows[0]), yy: dot(&self.rows[1]), xy: dot(&self.rows[2]) }
    }

    /// Action on a general (possibly non-symmetric) matrix: `C sym(A)`.
    pub fn apply_matrix(&self, a: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let s = self.apply(&Sym2::from_gradient(a));
        [[s.xx, s.xy], [s.xy, s.yy]]
    }

    /// Coercivity constant with `A : C A ≥ 2 c2 |sym(A)|²`, i.e. half the
    /// smallest eigenvalue of the tensor in the orthonormal (Mandel) basis.
    pub fn c2(&self) -> Result<f64> {
        let s = 2.0_f64.sqrt();
        let r = &self.rows;
        let m = arr2(&[
            [r[0][0], r[0][1], s * r[0][2] / 2.0],
            [r[1][0], r[1][1], s * r[1][2] / 2.0],
            [s * r[2][0], s * r[2][1], r[2][2]],
        ]);
        let asym = (m[[0, 1]] - m[[1, 0]]).abs().max((m[[0, 2]] - m[[2, 0]]).abs())
            .max((m[[1, 2]] - m[[2, 1]]).abs());
        if asym > 1e-12 {
            return Err(Error::InvalidArgument("elasticity tensor is not symmetric".into()));
        }
        let (vals, _) = m
            .eigh(ndarray_linalg::UPLO::Lower)
            .map_err(|e| Error::Eigensolver(format!("3x3 Mandel eigenvalues: {e}")))?;
        Ok(0.5 * vals.iter().fold(f64::INFINITY, |a, &b| a.min(b)))
    }
}

/// `W(c, E) = ½ (E - c E⋆) : C (E - c E⋆)`.
pub fn w_density(tensor: &ElasticityTensor, estar: &Sym2, c: f64, e: &Sym2) -> f64 {
    let misfit = e.sub(&estar.scale(c));
    0.5 * misfit.ddot(&tensor.apply(&misfit))
}

/// `W_{,c}(c, E) = -E⋆ : C (E - c E⋆)`.
pub fn w_c(tensor: &ElasticityTensor, estar: &Sym2, c: f64, e: &Sym2) -> f64 {
    let misfit = e.sub(&estar.scale(c));
    -estar.ddot(&tensor.apply(&misfit))
}

/// `S = W_{,E} = C (E - c E⋆)`.
pub fn stress(tensor: &ElasticityTensor, estar: &Sym2, c: f64, e: &Sym2) -> Sym2 {
    tensor.apply(&e.sub(&estar.scale(c)))
}

/// `(W, S, W_{,c})` at a point.
pub fn energy_and_stress(
    tensor: &ElasticityTensor,
    estar: &Sym2,
    c: f64,
    e: &Sym2,
) -> (f64, Sym2, f64) {
    (
        w_density(tensor, estar, c, e),
        stress(tensor, estar, c, e),
        w_c(tensor, estar, c, e),
    )
}

#[derive(Clone, Debug)]
pub struct ElasticState {
    pub ux: Field,
    pub uy: Field,
}

#[derive(Clone, Copy, Debug)]
pub struct CgStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Displacement boundary-value problem `div S = -g`, `S = C(E(u) - c E⋆)`,
/// with Dirichlet data on the whole boundary (zero if not supplied).
pub struct DisplacementProblem<'a> {
    pub grid: &'a Grid2D,
    pub tensor: &'a ElasticityTensor,
    pub estar: Sym2,
    pub dirichlet: Option<(&'a Field, &'a Field)>,
    pub body_force: Option<(&'a Field, &'a Field)>,
    pub tol: f64,
    pub max_iter: usize,
}

const GP: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)

/// Per-Gauss-point shape values and reference derivatives for the 4 local
/// nodes (di, dj) = (0,0), (1,0), (0,1), (1,1).
struct ElementBasis {
    n: [[f64; 4]; 4],
    dxi: [[f64; 4]; 4],
    deta: [[f64; 4]; 4],
    /// Gauss-point position within the cell in units of h.
    gx: [f64; 4],
    gy: [f64; 4],
}

fn element_basis() -> ElementBasis {
    let locs = [(-GP, -GP), (GP, -GP), (-GP, GP), (GP, GP)];
    let corners = [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)];
    let mut b = ElementBasis {
        n: [[0.0; 4]; 4],
        dxi: [[0.0; 4]; 4],
        deta: [[0.0; 4]; 4],
        gx: [0.0; 4],
        gy: [0.0; 4],
    };
    for (g, &(xi, eta)) in locs.iter().enumerate() {
        b.gx[g] = 0.5 * (xi + 1.0);
        b.gy[g] = 0.5 * (eta + 1.0);
        for (a, &(xa, ya)) in corners.iter().enumerate() {
            b.n[g][a] = 0.25 * (1.0 + xa * xi) * (1.0 + ya * eta);
            b.dxi[g][a] = 0.25 * xa * (1.0 + ya * eta);
            b.deta[g][a] = 0.25 * ya * (1.0 + xa * xi);
        }
    }
    b
}

fn local_nodes(i: usize, j: usize) -> [(usize, usize); 4] {
    [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
}

impl<'a> DisplacementProblem<'a> {
    fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.grid.n - 1 || j == self.grid.n - 1
    }

    /// Internal-force operator `u ↦ K u` (misfit and body force excluded).
    fn apply_stiffness(&self, basis: &ElementBasis, ux: &Field, uy: &Field) -> (Field, Field) {
        let g = self.grid;
        let n = g.n;
        let scale = 2.0 / g.h;
        let det = g.h * g.h / 4.0;
        let mut fx = g.zeros();
        let mut fy = g.zeros();
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let nodes = local_nodes(i, j);
                let lux: Vec<f64> = nodes.iter().map(|&(a, b)| ux[[a, b]]).collect();
                let luy: Vec<f64> = nodes.iter().map(|&(a, b)| uy[[a, b]]).collect();
                for gp in 0..4 {
                    let mut e = Sym2::default();
                    for a in 0..4 {
                        let dx = basis.dxi[gp][a] * scale;
                        let dy = basis.deta[gp][a] * scale;
                        e.xx += dx * lux[a];
                        e.yy += dy * luy[a];
                        e.xy += 0.5 * (dy * lux[a] + dx * luy[a]);
                    }
                    let s = self.tensor.apply(&e);
                    for a in 0..4 {
                        let dx = basis.dxi[gp][a] * scale;
                        let dy = basis.deta[gp][a] * scale;
                        let (ni, nj) = nodes[a];
                        fx[[ni, nj]] += (dx * s.xx + dy * s.xy) * det;
                        fy[[ni, nj]] += (dx * s.xy + dy * s.yy) * det;
                    }
                }
            }
        }
        (fx, fy)
    }

    /// Load vector from the eigenstrain and the optional body force.
    fn load(&self, basis: &ElementBasis, c_eval: &dyn Fn(f64, f64) -> f64) -> (Field, Field) {
        let g = self.grid;
        let n = g.n;
        let scale = 2.0 / g.h;
        let det = g.h * g.h / 4.0;
        let mut fx = g.zeros();
        let mut fy = g.zeros();
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let nodes = local_nodes(i, j);
                for gp in 0..4 {
                    let x = g.x(i) + basis.gx[gp] * g.h;
                    let y = g.x(j) + basis.gy[gp] * g.h;
                    let s0 = self.tensor.apply(&self.estar.scale(c_eval(x, y)));
                    let (bx, by) = match self.body_force {
                        Some((gx_f, gy_f)) => {
                            let mut bx = 0.0;
                            let mut by = 0.0;
                            for a in 0..4 {
                                let (ni, nj) = nodes[a];
                                bx += basis.n[gp][a] * gx_f[[ni, nj]];
                                by += basis.n[gp][a] * gy_f[[ni, nj]];
                            }
                            (bx, by)
                        }
                        None => (0.0, 0.0),
                    };
                    for a in 0..4 {
                        let dx = basis.dxi[gp][a] * scale;
                        let dy = basis.deta[gp][a] * scale;
                        let (ni, nj) = nodes[a];
                        fx[[ni, nj]] += (dx * s0.xx + dy * s0.xy + basis.n[gp][a] * bx) * det;
                        fy[[ni, nj]] += (dx * s0.xy + dy * s0.yy + basis.n[gp][a] * by) * det;
                    }
                }
            }
        }
        (fx, fy)
    }

    fn jacobi_diagonal(&self, basis: &ElementBasis) -> (Field, Field) {
        let g = self.grid;
        let n = g.n;
        let scale = 2.0 / g.h;
        let det = g.h * g.h / 4.0;
        let mut dx_f = g.zeros();
        let mut dy_f = g.zeros();
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let nodes = local_nodes(i, j);
                for gp in 0..4 {
                    for a in 0..4 {
                        let dx = basis.dxi[gp][a] * scale;
                        let dy = basis.deta[gp][a] * scale;
                        let (ni, nj) = nodes[a];
                        let ex = Sym2 { xx: dx, yy: 0.0, xy: 0.5 * dy };
                        let sx = self.tensor.apply(&ex);
                        dx_f[[ni, nj]] += (dx * sx.xx + dy * sx.xy) * det;
                        let ey = Sym2 { xx: 0.0, yy: dy, xy: 0.5 * dx };
                        let sy = self.tensor.apply(&ey);
                        dy_f[[ni, nj]] += (dx * sy.xy + dy * sy.yy) * det;
                    }
                }
            }
        }
        (dx_f, dy_f)
    }

    pub fn solve(
        &self,
        c_eval: &dyn Fn(f64, f64) -> f64,
        warm: Option<&ElasticState>,
    ) -> Result<(ElasticState, CgStats)> {
        let g = self.grid;
        let n = g.n;
        let basis = element_basis();

        let mut ux = g.zeros();
        let mut uy = g.zeros();
        if let Some(w) = warm {
            g.check_shape(&w.ux)?;
            ux.assign(&w.ux);
            uy.assign(&w.uy);
        }
        // Boundary values are imposed exactly before iterating.
        for i in 0..n {
            for j in 0..n {
                if self.is_boundary(i, j) {
                    match self.dirichlet {
                        Some((dx, dy)) => {
                            ux[[i, j]] = dx[[i, j]];
                            uy[[i, j]] = dy[[i, j]];
                        }
                        None => {
                            ux[[i, j]] = 0.0;
                            uy[[i, j]] = 0.0;
                        }
                    }
                }
            }
        }

        let (fx, fy) = self.load(&basis, c_eval);
        let (dgx, dgy) = self.jacobi_diagonal(&basis);

        let mask = |f: &mut Field| {
            for i in 0..n {
                f[[i, 0]] = 0.0;
                f[[i, n - 1]] = 0.0;
                f[[0, i]] = 0.0;
                f[[n - 1, i]] = 0.0;
            }
        };

        let (kx, ky) = self.apply_stiffness(&basis, &ux, &uy);
        let mut rx = &fx - &kx;
        let mut ry = &fy - &ky;
        mask(&mut rx);
        mask(&mut ry);

        let dot = |ax: &Field, ay: &Field, bx: &Field, by: &Field| -> f64 {
            ax.iter().zip(bx.iter()).map(|(a, b)| a * b).sum::<f64>()
                + ay.iter().zip(by.iter()).map(|(a, b)| a * b).sum::<f64>()
        };

        // Scale reference for the stopping test: the load, or the initial
        // residual if the load vanishes.
        let mut fref_x = fx.clone();
        let mut fref_y = fy.clone();
        mask(&mut fref_x);
        mask(&mut fref_y);
        let mut ref_norm = dot(&fref_x, &fref_y, &fref_x, &fref_y).sqrt();
        if ref_norm == 0.0 {
            ref_norm = dot(&rx, &ry, &rx, &ry).sqrt();
        }
        if ref_norm == 0.0 {
            return Ok((ElasticState { ux, uy }, CgStats { iterations: 0, rel_residual: 0.0 }));
        }

        let precond = |rx: &Field, ry: &Field| -> (Field, Field) {
            let mut zx = rx / &dgx;
            let mut zy = ry / &dgy;
            mask(&mut zx);
            mask(&mut zy);
            (zx, zy)
        };

        let (mut zx, mut zy) = precond(&rx, &ry);
        let mut px = zx.clone();
        let mut py = zy.clone();
        let mut rz = dot(&rx, &ry, &zx, &zy);
        let mut iterations = 0;
        let mut rel = dot(&rx, &ry, &rx, &ry).sqrt() / ref_norm;
        while rel > self.tol {
            if iterations >= self.max_iter {
                return Err(Error::CgNonConvergence { iterations, rel_residual: rel });
            }
            let (mut apx, mut apy) = self.apply_stiffness(&basis, &px, &py);
            mask(&mut apx);
            mask(&mut apy);
            let pap = dot(&px, &py, &apx, &apy);
            if !(pap > 0.0) {
                return Err(Error::SolverFailure(format!(
                    "stiffness lost positive definiteness (p^T K p = {pap:.3e})"
                )));
            }
            let alpha = rz / pap;
            ux.scaled_add(alpha, &px);
            uy.scaled_add(alpha, &py);
            rx.scaled_add(-alpha, &apx);
            ry.scaled_add(-alpha, &apy);
            let (nzx, nzy) = precond(&rx, &ry);
            zx = nzx;
            zy = nzy;
            let rz_new = dot(&rx, &ry, &zx, &zy);
            let beta = rz_new / rz;
            rz = rz_new;
            px = &zx + &(&px * beta);
            py = &zy + &(&py * beta);
            iterations += 1;
            rel = dot(&rx, &ry, &rx, &ry).sqrt() / ref_norm;
        }
        if ux.iter().chain(uy.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("displacement field".into()));
        }
        Ok((ElasticState { ux, uy }, CgStats { iterations, rel_residual: rel }))
    }
}

/// Elastic energy `∫ W(c, E(u))` by the same Gauss quadrature as the solve.
pub fn elastic_energy(
    grid: &Grid2D,
    c_eval: &dyn Fn(f64, f64) -> f64,
    tensor: &ElasticityTensor,
    estar: &Sym2,
    state: &ElasticState,
) -> f64 {
    let basis = element_basis();
    let n = grid.n;
    let scale = 2.0 / grid.h;
    let det = grid.h * grid.h / 4.0;
    let mut acc = 0.0;
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let nodes = local_nodes(i, j);
            for gp in 0..4 {
                let mut e = Sym2::default();
                for a in 0..4 {
                    let (ni, nj) = nodes[a];
                    let dx = basis.dxi[gp][a] * scale;
                    let dy = basis.deta[gp][a] * scale;
                    e.xx += dx * state.ux[[ni, nj]];
                    e.yy += dy * state.uy[[ni, nj]];
                    e.xy += 0.5 * (dy * state.ux[[ni, nj]] + dx * state.uy[[ni, nj]]);
                }
                let x = grid.x(i) + basis.gx[gp] * grid.h;
                let y = grid.x(j) + basis.gy[gp] * grid.h;
                acc += w_density(tensor, estar, c_eval(x, y), &e) * det;
            }
        }
    }
    acc
}

/// Nodal strain components from centered differences of the displacement.
pub fn strain_at_nodes(grid: &Grid2D, state: &ElasticState) -> (Field, Field, Field) {
    let (uxx, uxy) = grid.gradient(&state.ux);
    let (uyx, uyy) = grid.gradient(&state.uy);
    let exy = 0.5 * &(&uxy + &uyx);
    (uxx, uyy, exy)
}

/// Nodal `W_{,c}(c, E(u))` field.
pub fn wc_field(
    grid: &Grid2D,
    c: &Field,
    tensor: &ElasticityTensor,
    estar: &Sym2,
    state: &ElasticState,
) -> Field {
    let (exx, eyy, exy) = strain_at_nodes(grid, state);
    let mut out = grid.zeros();
    for i in 0..grid.n {
        for j in 0..grid.n {
            let e = Sym2 { xx: exx[[i, j]], yy: eyy[[i, j]], xy: exy[[i, j]] };
            out[[i, j]] = w_c(tensor, estar, c[[i, j]], &e);
        }
    }
    out
}

/// Radially symmetric reference: a disc of radius `r_in` (c = -1, eigenstrain
/// `-ϑ Id`) inside a matrix (c = +1, eigenstrain `+ϑ Id`), displacement
/// clamped at radius `r_out`. Plane-strain isotropic. The disc is the
/// `{d < 0}` phase of the signed-distance convention used throughout.
#[derive(Clone, Copy, Debug)]
pub struct RadialMisfit {
    pub lambda: f64,
    pub mu: f64,
    /// Dilational eigenstrain per unit concentration, `E⋆ = ϑ Id`.
    pub theta: f64,
    /// Concentration of the disc phase (the sharp limit uses -1).
    pub c_in: f64,
    /// Concentration of the matrix phase (+1 in the sharp limit).
    pub c_out: f64,
    pub r_in: f64,
    pub r_out: f64,
}

/// `u_r(r) = a r` for `r ≤ r_in`, `b r + d/r` for `r_in ≤ r ≤ r_out`.
#[derive(Clone, Copy, Debug)]
pub struct RadialSolution {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub cfg: RadialMisfit,
}

impl RadialMisfit {
    fn e0(&self, inside: bool) -> f64 {
        self.theta * if inside { self.c_in } else { self.c_out }
    }

    pub fn solve(&self) -> Result<RadialSolution> {
        if !(self.r_in > 0.0 && self.r_out > self.r_in) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < r_in < r_out, got {} and {}",
                self.r_in, self.r_out
            )));
        }
        if self.mu <= 0.0 || self.lambda + self.mu <= 0.0 {
            return Err(Error::InvalidArgument("non-coercive moduli".into()));
        }
        let (l, m) = (self.lambda, self.mu);
        // Continuity of u_r, continuity of S_rr across r_in (with the
        // eigenstrain jump), u_r(r_out) = 0; eliminating a and b leaves
        //   d (lambda + 2 mu) / r_in² = (lambda + mu)(e0_in - e0_out).
        let d = self.r_in * self.r_in * (l + m) * (self.e0(true) - self.e0(false))
            / (l + 2.0 * m);
        let b = -d / (self.r_out * self.r_out);
        let a = b + d / (self.r_in * self.r_in);
        Ok(RadialSolution { a, b, d, cfg: *self })
    }
}

impl RadialSolution {
    pub fn u_r(&self, r: f64) -> f64 {
        if r <= self.cfg.r_in {
            self.a * r
        } else {
            self.b * r + self.d / r
        }
    }

    /// Cartesian displacement relative to the disc center.
    pub fn displacement(&self, dx: f64, dy: f64) -> (f64, f64) {
        let r = (dx * dx + dy * dy).sqrt();
        if r == 0.0 {
            return (0.0, 0.0);
        }
        let ur = self.u_r(r);
        (ur * dx / r, ur * dy / r)
    }

    /// Radial and hoop strain on the chosen side of the interface.
    fn strains(&self, r: f64, inside: bool) -> (f64, f64) {
        if inside {
            (self.a, self.a)
        } else {
            (self.b - self.d / (r * r), self.b + self.d / (r * r))
        }
    }

    /// Radial stress `S_rr` (with the eigenstrain of the resident phase).
    pub fn s_rr(&self, r: f64, inside: bool) -> f64 {
        let (l, m) = (self.cfg.lambda, self.cfg.mu);
        let e0 = self.cfg.e0(inside);
        let (err, ett) = self.strains(r, inside);
        l * (err + ett - 2.0 * e0) + 2.0 * m * (err - e0)
    }

    /// The elastic Gibbs-Thomson jump `½ ν^T [W Id - (∇u)^T S] ν` at `r_in`.
    pub fn jump(&self, tensor: &ElasticityTensor) -> f64 {
        let gp = self.gradient(self.cfg.r_in, 0.0, false);
        let gm = self.gradient(self.cfg.r_in, 0.0, true);
        elastic_jump(
            tensor,
            &Sym2::diag(self.cfg.theta),
            &gp,
            &gm,
            self.cfg.c_out,
            self.cfg.c_in,
            (1.0, 0.0),
        )
    }

    /// Full displacement gradient at a point on the circle `|x| = r`, taken
    /// from the chosen side, in Cartesian components.
    pub fn gradient(&self, dx: f64, dy: f64, inside: bool) -> [[f64; 2]; 2] {
        let r = (dx * dx + dy * dy).sqrt();
        let (nx, ny) = (dx / r, dy / r);
        let (err, ett) = self.strains(r, inside);
        // grad u = u_r' n⊗n + (u_r/r)(Id - n⊗n) for radial fields.
        [
            [err * nx * nx + ett * ny * ny, (err - ett) * nx * ny],
            [(err - ett) * nx * ny, err * ny * ny + ett * nx * nx],
        ]
    }
}

/// Equilibrium displacement for a radially symmetric dilatational
/// eigenstrain profile `e⋆(r)·Id`, regular at the origin and clamped at
/// `r_out`:
///
/// `u_r(r) = a·r + (k/r)·∫_0^r e⋆(s)·s ds`, `k = 2(λ+μ)/(λ+2μ)`,
///
/// which satisfies `div S = 0` for every profile (the sharp two-phase
/// solution is the step-profile special case). The cumulative integral is
/// tabulated on a uniform radial grid and completed by one local trapezoid
/// step, so the evaluated `u_r` has a continuous derivative.
#[derive(Clone, Debug)]
pub struct DiffuseRadial {
    dr: f64,
    estar: Vec<f64>,
    /// `∫_0^{r_i} e⋆(s)·s ds` at the table nodes.
    p: Vec<f64>,
    /// Coefficient of the linear part, fixed by `u_r(r_out) = 0`.
    pub a: f64,
    /// `2(λ+μ)/(λ+2μ)`.
    pub k: f64,
}

impl RadialMisfit {
    /// Solve with a radial concentration profile `c_of_r` (so that
    /// `e⋆(r) = ϑ·c_of_r(r)`), tabulated with step `dr` up to `r_max`.
    pub fn solve_diffuse<F: Fn(f64) -> f64>(
        &self,
        c_of_r: F,
        r_max: f64,
        dr: f64,
    ) -> Result<DiffuseRadial> {
        if !(self.r_in > 0.0 && self.r_out > self.r_in) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < r_in < r_out, got {} and {}",
                self.r_in, self.r_out
            )));
        }
        if self.mu <= 0.0 || self.lambda + self.mu <= 0.0 {
            return Err(Error::InvalidArgument("non-coercive moduli".into()));
        }
        if !(dr > 0.0 && dr.is_finite()) || !(r_max > self.r_out) {
            return Err(Error::InvalidArgument(format!(
                "need dr > 0 and r_max > r_out, got {dr} and {r_max}"
            )));
        }
        let n = (r_max / dr).ceil() as usize + 2;
        let mut estar = Vec::with_capacity(n);
        for i in 0..n {
            let e = self.theta * c_of_r(i as f64 * dr);
            if !e.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "eigenstrain profile not finite at r = {}",
                    i as f64 * dr
                )));
            }
            estar.push(e);
        }
        let mut p = vec![0.0; n];
        for i in 1..n {
            let (r0, r1) = ((i - 1) as f64 * dr, i as f64 * dr);
            p[i] = p[i - 1] + 0.5 * dr * (estar[i - 1] * r0 + estar[i] * r1);
        }
        let k = 2.0 * (self.lambda + self.mu) / (self.lambda + 2.0 * self.mu);
        let mut sol = DiffuseRadial { dr, estar, p, a: 0.0, k };
        let p_out = sol.cumulative(self.r_out)?;
        sol.a = -k * p_out / (self.r_out * self.r_out);
        Ok(sol)
    }
}

impl DiffuseRadial {
    /// `∫_0^r e⋆(s)·s ds`: table value plus one trapezoid step against the
    /// linearly interpolated profile.
    fn cumulative(&self, r: f64) -> Result<f64> {
        let i = (r / self.dr).floor() as usize;
        if i + 1 >= self.p.len() {
            return Err(Error::Precondition(format!(
                "radius {r} beyond the tabulated range"
            )));
        }
        let r0 = i as f64 * self.dr;
        let t = (r - r0) / self.dr;
        let e_r = self.estar[i] * (1.0 - t) + self.estar[i + 1] * t;
        Ok(self.p[i] + 0.5 * (r - r0) * (self.estar[i] * r0 + e_r * r))
    }

    pub fn u_r(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        Ok(self.a * r + self.k * self.cumulative(r)? / r)
    }

    /// Cartesian displacement relative to the disc center.
    pub fn displacement(&self, dx: f64, dy: f64) -> Result<(f64, f64)> {
        let r = (dx * dx + dy * dy).sqrt();
        if r == 0.0 {
            return Ok((0.0, 0.0));
        }
        let ur = self.u_r(r)?;
        Ok((ur * dx / r, ur * dy / r))
    }
}

/// `½ ν^T [W Id - (∇u)^T S]_Γ ν` from one-sided displacement gradients. The
/// plus side is the `{d > 0}` phase (c = +1 in the sharp limit).
pub fn elastic_jump(
    tensor: &ElasticityTensor,
    estar: &Sym2,
    grad_plus: &[[f64; 2]; 2],
    grad_minus: &[[f64; 2]; 2],
    c_plus: f64,
    c_minus: f64,
    nu: (f64, f64),
) -> f64 {
    let side = |g: &[[f64; 2]; 2], c: f64| -> f64 {
        let e = Sym2::from_gradient(g);
        let w = w_density(tensor, estar, c, &e);
        let s = stress(tensor, estar, c, &e);
        // ν^T (W Id - (∇u)^T S) ν with (∇u)^T S contracted explicitly.
        let gs = [
            [
                g[0][0] * s.xx + g[1][0] * s.xy,
                g[0][0] * s.xy + g[1][0] * s.yy,
            ],
            [
                g[0][1] * s.xx + g[1][1] * s.xy,
                g[0][1] * s.xy + g[1][1] * s.yy,
            ],
        ];
        let quad = nu.0 * (gs[0][0] * nu.0 + gs[0][1] * nu.1)
            + nu.1 * (gs[1][0] * nu.0 + gs[1][1] * nu.1);
        w - quad
    };
    0.5 * (side(grad_plus, c_plus) - side(grad_minus, c_minus))
}

/// The equivalent form `-½ (∇u⁺ + ∇u⁻) : C E⋆`, valid when displacement and
/// traction are continuous across the interface and c jumps from -1 to +1.
pub fn elastic_jump_identity(
    tensor: &ElasticityTensor,
    estar: &Sym2,
    grad_plus: &[[f64; 2]; 2],
    grad_minus: &[[f64; 2]; 2],
) -> f64 {
    let sum = Sym2 {
        xx: grad_plus[0][0] + grad_minus[0][0],
        yy: grad_plus[1][1] + grad_minus[1][1],
        xy: 0.5 * (grad_plus[0][1] + grad_plus[1][0] + grad_minus[0][1] + grad_minus[1][0]),
    };
    -0.5 * sum.ddot(&tensor.apply(estar))
}
