//! Double-well potential `F` and its derivatives.
//!
//! The solver only ever needs `F`, `f = F'`, `f'` and `f''` pointwise, so
//! potentials are restricted to polynomials and evaluated exactly by Horner's
//! rule. The structural assumptions on `f` (zeros at ±1 with positive slope,
//! equal-well condition, convexity at infinity beyond `c0`) are exposed as a
//! machine-checkable report rather than trusted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WellKind {
    Quartic,
    CustomPolynomial,
}

/// Polynomial double-well potential.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PotentialSpec", into = "PotentialSpec")]
pub struct DoubleWell {
    kind: WellKind,
    /// Coefficients of `F` in ascending order of degree.
    coefficients: Vec<f64>,
    /// Threshold in the convexity-at-infinity assumption `c f''(c) >= 0`.
    pub c0: f64,
    /// Interval the solver expects `c` to stay in.
    pub range_hint: (f64, f64),
    /// Coefficient tables for F, f, f', f''.
    #[serde(skip)]
    derivs: [Vec<f64>; 4],
}

/// Serde-facing shape, matching the run-config file.
#[derive(Serialize, Deserialize)]
struct PotentialSpec {
    kind: WellKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    coefficients: Vec<f64>,
    #[serde(default)]
    c0: f64,
    #[serde(default = "default_range")]
    range_hint: (f64, f64),
}

fn default_range() -> (f64, f64) {
    (-1.2, 1.2)
}

impl TryFrom<PotentialSpec> for DoubleWell {
    type Error = Error;
    fn try_from(s: PotentialSpec) -> Result<Self> {
        match s.kind {
            WellKind::Quartic => {
                let mut w = DoubleWell::quartic();
                w.c0 = s.c0;
                w.range_hint = s.range_hint;
                Ok(w)
            }
            WellKind::CustomPolynomial => {
                DoubleWell::from_coefficients(s.coefficients, s.c0, s.range_hint)
            }
        }
    }
}

impl From<DoubleWell> for PotentialSpec {
    fn from(w: DoubleWell) -> Self {
        PotentialSpec {
            kind: w.kind,
            coefficients: match w.kind {
                WellKind::Quartic => Vec::new(),
                WellKind::CustomPolynomial => w.coefficients.clone(),
            },
            c0: w.c0,
            range_hint: w.range_hint,
        }
    }
}

fn differentiate(p: &[f64]) -> Vec<f64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| k as f64 * a)
        .collect()
}

fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

impl DoubleWell {
    /// `F(c) = (1 - c^2)^2`, the standard quartic well with minima at ±1.
    pub fn quartic() -> Self {
        Self::build(WellKind::Quartic, vec![1.0, 0.0, -2.0, 0.0, 1.0], 0.0, default_range())
    }

    /// Custom polynomial well from ascending coefficients of `F`.
    pub fn from_coefficients(
        coefficients: Vec<f64>,
        c0: f64,
        range_hint: (f64, f64),
    ) -> Result<Self> {
        if coefficients.len() < 3 {
            return Err(Error::InvalidArgument(
                "potential polynomial must have degree >= 2".into(),
            ));
        }
        if c0 < 0.0 {
            return Err(Error::InvalidArgument("c0 must be >= 0".into()));
        }
        Ok(Self::build(WellKind::CustomPolynomial, coefficients, c0, range_hint))
    }

    fn build(kind: WellKind, coefficients: Vec<f64>, c0: f64, range_hint: (f64, f64)) -> Self {
        let d0 = coefficients.clone();
        let d1 = differentiate(&d0);
        let d2 = differentiate(&d1);
        let d3 = differentiate(&d2);
        DoubleWell {
            kind,
            coefficients,
            c0,
            range_hint,
            derivs: [d0, d1, d2, d3],
        }
    }

    pub fn kind(&self) -> WellKind {
        self.kind
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Evaluate `F` (deriv 0), `f = F'` (1), `f'` (2), or `f''` (3) at `c`.
    pub fn evaluate(&self, c: f64, deriv: u32) -> Result<f64> {
        if deriv > 3 {
            return Err(Error::InvalidArgument(format!(
                "derivative order {deriv} outside 0..=3"
            )));
        }
        if !c.is_finite() {
            return Err(Error::NonFinite("potential argument".into()));
        }
        Ok(horner(&self.derivs[deriv as usize], c))
    }

    pub fn big_f(&self, c: f64) -> f64 {
        horner(&self.derivs[0], c)
    }

    pub fn f(&self, c: f64) -> f64 {
        horner(&self.derivs[1], c)
    }

    pub fn f_prime(&self, c: f64) -> f64 {
        horner(&self.derivs[2], c)
    }

    pub fn f_dprime(&self, c: f64) -> f64 {
        horner(&self.derivs[3], c)
    }

    /// `f(-c) = -f(c)` on a sample grid; the profile machinery relies on this
    /// to kill the bridging-moment integrals by symmetry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = 257;
        (0..n).all(|i| {
            let c = -1.5 + 3.0 * i as f64 / (n - 1) as f64;
            (self.f(-c) + self.f(c)).abs() <= tol
        })
    }

    /// Check the structural assumptions on `f` on a uniform sample grid.
    pub fn validate(&self, samples: usize) -> ValidationReport {
        let samples = samples.max(100);
        let mut report = ValidationReport::default();

        // Wells at ±1 with value zero.
        let tol = match self.kind {
            WellKind::Quartic => 0.0,
            WellKind::CustomPolynomial => 1e-12,
        };
        let worst_end = if self.big_f(-1.0).abs() >= self.big_f(1.0).abs() {
            -1.0
        } else {
            1.0
        };
        report.push(
            "minimum-at-±1",
            self.big_f(-1.0).abs() <= tol && self.big_f(1.0).abs() <= tol,
            worst_end,
            self.big_f(worst_end),
        );

        // f(±1) = 0, f'(±1) > 0.
        let f_ok = self.f(-1.0).abs() <= 1e-12 && self.f(1.0).abs() <= 1e-12;
        let slope_ok = self.f_prime(-1.0) > 0.0 && self.f_prime(1.0) > 0.0;
        let worst = if self.f(-1.0).abs() + self.f_prime(-1.0).min(0.0).abs()
            >= self.f(1.0).abs() + self.f_prime(1.0).min(0.0).abs()
        {
            -1.0
        } else {
            1.0
        };
        report.push("transversal-zeros-at-±1", f_ok && slope_ok, worst, self.f(worst));

        // Equal wells: ∫_{-1}^{u} f = ∫_{1}^{u} f > 0 for u in (-1,1),
        // i.e. F(u) - F(-1) = F(u) - F(1) > 0 on the open interval.
        let mut ok = self.big_f(-1.0) - self.big_f(1.0) == 0.0
            || (self.big_f(-1.0) - self.big_f(1.0)).abs() <= 1e-12;
        let mut worst_u = 0.0;
        let mut worst_v = f64::INFINITY;
        for i in 1..samples {
            let u = -1.0 + 2.0 * i as f64 / samples as f64;
            if u.abs() >= 1.0 {
                continue;
            }
            let v = self.big_f(u) - self.big_f(1.0);
            if v < worst_v {
                worst_v = v;
                worst_u = u;
            }
            if v <= 0.0 {
                ok = false;
            }
        }
        report.push("equal-positive-wells", ok, worst_u, worst_v);

        // Convexity at infinity: c f''(c) >= 0 for |c| >= c0.
        let reach = self.range_hint.0.abs().max(self.range_hint.1.abs()).max(2.0) * 2.0;
        let mut ok = true;
        let mut worst_c = self.c0;
        let mut worst_v = f64::INFINITY;
        for i in 0..samples {
            let t = self.c0 + (reach - self.c0) * i as f64 / (samples - 1) as f64;
            for c in [t, -t] {
                let v = c * self.f_dprime(c);
                if v < worst_v {
                    worst_v = v;
                    worst_c = c;
                }
                if v < 0.0 {
                    ok = false;
                }
            }
        }
        report.push("convex-at-infinity", ok, worst_c, worst_v);

        report
    }
}

/// Per-assumption pass/fail with the worst violating sample.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<AssumptionCheck>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    pub worst_sample: f64,
    pub worst_value: f64,
}

impl ValidationReport {
    fn push(&mut self, name: &str, passed: bool, worst_sample: f64, worst_value: f64) {
        self.checks.push(AssumptionCheck {
            name: name.to_string(),
            passed,
            worst_sample,
            worst_value,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}
