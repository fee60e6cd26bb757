//! Uniform cell-vertex grid on the square `[0, L]²` with trapezoid
//! quadrature, five-point Neumann Laplacian, and the cosine (DCT-I)
//! diagonalization used by the semi-implicit stepper and the spectral
//! residual meter.

use ndarray::Array2;

use crate::error::{Error, Result};

pub type Field = Array2<f64>;

/// Nodes at `(i h, j h)` for `i, j = 0..n-1`, `h = L/(n-1)`. Fields are
/// indexed `[i, j]` with `i` along x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    pub n: usize,
    pub length: f64,
    pub h: f64,
}

impl Grid2D {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("grid needs n >= 3, got {n}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid side length {length}")));
        }
        Ok(Grid2D { n, length, h: length / (n - 1) as f64 })
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// Trapezoid weight of node index `i` in one direction.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n - 1 {
            0.5
        } else {
            1.0
        }
    }

    pub fn zeros(&self) -> Field {
        Field::zeros((self.n, self.n))
    }

    pub fn from_fn<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> Field {
        Field::from_shape_fn((self.n, self.n), |(i, j)| f(self.x(i), self.x(j)))
    }

    pub fn check_shape(&self, u: &Field) -> Result<()> {
        if u.dim() != (self.n, self.n) {
            return Err(Error::GridMismatch(format!(
                "field shape {:?} does not match grid {n}x{n}",
                u.dim(),
                n = self.n
            )));
        }
        Ok(())
    }

    pub fn integrate(&self, u: &Field) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            let wi = self.weight(i);
            for j in 0..n {
                acc += wi * self.weight(j) * u[[i, j]];
            }
        }
        acc * self.h * self.h
    }

    pub fn inner(&self, u: &Field, v: &Field) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            let wi = self.weight(i);
            for j in 0..n {
                acc += wi * self.weight(j) * u[[i, j]] * v[[i, j]];
            }
        }
        acc * self.h * self.h
    }

    pub fn mean(&self, u: &Field) -> f64 {
        self.integrate(u) / (self.length * self.length)
    }

    pub fn norm_l2(&self, u: &Field) -> f64 {
        self.inner(u, u).sqrt()
    }

    pub fn norm_lp(&self, u: &Field, p: f64) -> f64 {
        let v = u.mapv(|x| x.abs().powf(p));
        self.integrate(&v).powf(1.0 / p)
    }

    pub fn norm_max(&self, u: &Field) -> f64 {
        u.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
    }

    /// Five-point Laplacian with mirrored ghost nodes (homogeneous Neumann).
    pub fn laplacian5(&self, u: &Field) -> Field {
        let n = self.n;
        let h2 = self.h * self.h;
        let mut out = self.zeros();
        for i in 0..n {
            for j in 0..n {
                let c = u[[i, j]];
                let xm = if i == 0 { u[[1, j]] } else { u[[i - 1, j]] };
                let xp = if i == n - 1 { u[[n - 2, j]] } else { u[[i + 1, j]] };
                let ym = if j == 0 { u[[i, 1]] } else { u[[i, j - 1]] };
                let yp = if j == n - 1 { u[[i, n - 2]] } else { u[[i, j + 1]] };
                out[[i, j]] = (xm + xp + ym + yp - 4.0 * c) / h2;
            }
        }
        out
    }

    /// Edge-midpoint quadrature of `∫ |∇u|²`.
    pub fn gradient_energy(&self, u: &Field) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n - 1 {
            for j in 0..n {
                let d = u[[i + 1, j]] - u[[i, j]];
                acc += self.weight(j) * d * d;
            }
        }
        for i in 0..n {
            let wi = self.weight(i);
            for j in 0..n - 1 {
                let d = u[[i, j + 1]] - u[[i, j]];
                acc += wi * d * d;
            }
        }
        acc
    }

    pub fn sample_bilinear(&self, u: &Field, x: f64, y: f64) -> Result<f64> {
        let tol = 1e-12 * self.length;
        if x < -tol || y < -tol || x > self.length + tol || y > self.length + tol {
            return Err(Error::OutOfDomain { x, y });
        }
        let locate = |s: f64| -> (usize, f64) {
            let t = (s / self.h).clamp(0.0, (self.n - 1) as f64);
            let i = (t.floor() as usize).min(self.n - 2);
            (i, t - i as f64)
        };
        let (i, tx) = locate(x);
        let (j, ty) = locate(y);
        Ok(u[[i, j]] * (1.0 - tx) * (1.0 - ty)
            + u[[i + 1, j]] * tx * (1.0 - ty)
            + u[[i, j + 1]] * (1.0 - tx) * ty
            + u[[i + 1, j + 1]] * tx * ty)
    }

    /// Centered-difference gradient, one-sided at the boundary.
    pub fn gradient(&self, u: &Field) -> (Field, Field) {
        let n = self.n;
        let mut gx = self.zeros();
        let mut gy = self.zeros();
        for i in 0..n {
            for j in 0..n {
                gx[[i, j]] = match i {
                    0 => (-3.0 * u[[0, j]] + 4.0 * u[[1, j]] - u[[2, j]]) / (2.0 * self.h),
                    k if k == n - 1 => {
                        (3.0 * u[[n - 1, j]] - 4.0 * u[[n - 2, j]] + u[[n - 3, j]]) / (2.0 * self.h)
                    }
                    k => (u[[k + 1, j]] - u[[k - 1, j]]) / (2.0 * self.h),
                };
                gy[[i, j]] = match j {
                    0 => (-3.0 * u[[i, 0]] + 4.0 * u[[i, 1]] - u[[i, 2]]) / (2.0 * self.h),
                    k if k == n - 1 => {
                        (3.0 * u[[i, n - 1]] - 4.0 * u[[i, n - 2]] + u[[i, n - 3]]) / (2.0 * self.h)
                    }
                    k => (u[[i, k + 1]] - u[[i, k - 1]]) / (2.0 * self.h),
                };
            }
        }
        (gx, gy)
    }
}

/// DCT-I diagonalization of the Neumann problem, realized as dense matrix
/// products (grids stay at desk scale, so `O(n³)` transforms are fine).
///
/// The mode vectors `cos(πki/(n-1))` diagonalize the mirrored five-point
/// Laplacian exactly, with eigenvalues `4 sin²(πk/(2(n-1)))/h²`; they are
/// orthogonal under the trapezoid weights.
pub struct DctPlan {
    pub grid: Grid2D,
    forward: Array2<f64>,
    inverse: Array2<f64>,
    /// Discrete five-point eigenvalues per 1D mode.
    pub lambda5: Vec<f64>,
    /// Continuous symbol `(πk/L)²` per 1D mode.
    pub lambda_exact: Vec<f64>,
}

impl DctPlan {
    pub fn new(grid: Grid2D) -> Self {
        let n = grid.n;
        let m = (n - 1) as f64;
        let mut forward = Array2::zeros((n, n));
        let mut inverse = Array2::zeros((n, n));
        for k in 0..n {
            let gamma = if k == 0 || k == n - 1 { m } else { m / 2.0 };
            for i in 0..n {
                let c = (std::f64::consts::PI * k as f64 * i as f64 / m).cos();
                inverse[[i, k]] = c;
                forward[[k, i]] = grid.weight(i) * c / gamma;
            }
        }
        let lambda5 = (0..n)
            .map(|k| {
                let s = (std::f64::consts::PI * k as f64 / (2.0 * m)).sin();
                4.0 * s * s / (grid.h * grid.h)
            })
            .collect();
        let lambda_exact = (0..n)
            .map(|k| (std::f64::consts::PI * k as f64 / grid.length).powi(2))
            .collect();
        DctPlan { grid, forward, inverse, lambda5, lambda_exact }
    }

    /// Mode coefficients `û` with `u = Σ û_kl cos(πkx/L) cos(πly/L)`.
    pub fn forward(&self, u: &Field) -> Field {
        self.forward.dot(u).dot(&self.forward.t())
    }

    /// Nodal value of the 1D mode `cos(πki/(n-1))`.
    pub fn mode_value(&self, k: usize, i: usize) -> f64 {
        self.inverse[[i, k]]
    }

    pub fn inverse(&self, uhat: &Field) -> Field {
        self.inverse.dot(uhat).dot(&self.inverse.t())
    }

    /// High-accuracy Laplacian through the continuous mode symbol.
    pub fn laplacian_spectral(&self, u: &Field) -> Field {
        let mut uhat = self.forward(u);
        let n = self.grid.n;
        for k in 0..n {
            for l in 0..n {
                uhat[[k, l]] *= -(self.lambda_exact[k] + self.lambda_exact[l]);
            }
        }
        self.inverse(&uhat)
    }
}
