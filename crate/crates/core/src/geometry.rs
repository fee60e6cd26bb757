//! Interface geometry: signed distances, zero-contour extraction, curvature
//! and normals, and one-sided sampling for jump estimation.
//!
//! Sign conventions: `d < 0` inside the enclosed phase Ω⁻, `ν = ∇d` points
//! from Ω⁻ into Ω⁺, and `κ = -Δd`, so a circle of radius R enclosing the
//! negative phase has `κ = -1/R`.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};

#[derive(Clone, Debug)]
pub enum Shape {
    Circle { center: (f64, f64), r: f64 },
    Ellipse { center: (f64, f64), a: f64, b: f64 },
    Polyline(Vec<(f64, f64)>),
}

/// Signed distance evaluator; negative inside.
#[derive(Clone, Debug)]
pub struct SignedDistanceMap {
    pub shape: Shape,
}

pub fn sdf(shape: Shape) -> Result<SignedDistanceMap> {
    match &shape {
        Shape::Circle { r, .. } => {
            if *r <= 0.0 {
                return Err(Error::InvalidArgument("circle radius must be positive".into()));
            }
        }
        Shape::Ellipse { a, b, .. } => {
            if *a <= 0.0 || *b <= 0.0 {
                return Err(Error::InvalidArgument("ellipse semi-axes must be positive".into()));
            }
        }
        Shape::Polyline(pts) => {
            if pts.len() < 3 {
                return Err(Error::InvalidArgument("polyline needs at least 3 points".into()));
            }
        }
    }
    Ok(SignedDistanceMap { shape })
}

impl SignedDistanceMap {
    /// Signed distance and the projection of the point onto the interface.
    pub fn eval(&self, x: f64, y: f64) -> Result<(f64, (f64, f64))> {
        match &self.shape {
            Shape::Circle { center, r } => {
                let (dx, dy) = (x - center.0, y - center.1);
                let rho = (dx * dx + dy * dy).sqrt();
                if rho == 0.0 {
                    return Ok((-r, (center.0 + r, center.1)));
                }
                let p = (center.0 + r * dx / rho, center.1 + r * dy / rho);
                Ok((rho - r, p))
            }
            Shape::Ellipse { center, a, b } => {
                let (dx, dy) = (x - center.0, y - center.1);
                let (px, py) = ellipse_project(dx.abs(), dy.abs(), *a, *b)?;
                let dist = ((dx.abs() - px).powi(2) + (dy.abs() - py).powi(2)).sqrt();
                let inside = (dx / a).powi(2) + (dy / b).powi(2) < 1.0;
                let sign = if inside { -1.0 } else { 1.0 };
                let proj = (center.0 + px.copysign(if dx == 0.0 { 1.0 } else { dx }),
                            center.1 + py.copysign(if dy == 0.0 { 1.0 } else { dy }));
                Ok((sign * dist, proj))
            }
            Shape::Polyline(pts) => {
                let mut best = f64::INFINITY;
                let mut proj = pts[0];
                let n = pts.len();
                for k in 0..n {
                    let p0 = pts[k];
                    let p1 = pts[(k + 1) % n];
                    let (ex, ey) = (p1.0 - p0.0, p1.1 - p0.1);
                    let len2 = ex * ex + ey * ey;
                    let t = if len2 == 0.0 {
                        0.0
                    } else {
                        (((x - p0.0) * ex + (y - p0.1) * ey) / len2).clamp(0.0, 1.0)
                    };
                    let q = (p0.0 + t * ex, p0.1 + t * ey);
                    let d2 = (x - q.0).powi(2) + (y - q.1).powi(2);
                    if d2 < best {
                        best = d2;
                        proj = q;
                    }
                }
                // Winding sign by the crossing parity of a horizontal ray.
                let mut crossings = 0;
                for k in 0..n {
                    let p0 = pts[k];
                    let p1 = pts[(k + 1) % n];
                    if (p0.1 > y) != (p1.1 > y) {
                        let xi = p0.0 + (y - p0.1) / (p1.1 - p0.1) * (p1.0 - p0.0);
                        if xi > x {
                            crossings += 1;
                        }
                    }
                }
                let sign = if crossings % 2 == 1 { -1.0 } else { 1.0 };
                Ok((sign * best.sqrt(), proj))
            }
        }
    }

    /// `∇d` by central differences (exact up to 1e-8 for the analytic shapes).
    pub fn gradient(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let h = 1e-6;
        let dx = (self.eval(x + h, y)?.0 - self.eval(x - h, y)?.0) / (2.0 * h);
        let dy = (self.eval(x, y + h)?.0 - self.eval(x, y - h)?.0) / (2.0 * h);
        Ok((dx, dy))
    }
}

/// Nearest point on the first-quadrant arc of the ellipse `(a cos t, b sin t)`
/// to `(x, y)` with `x, y ≥ 0`, by Newton iteration on the optimality
/// condition `f(t) = (a² - b²) cos t sin t - x a sin t + y b cos t = 0`.
fn ellipse_project(x: f64, y: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    let point = |t: f64| (a * t.cos(), b * t.sin());
    let dist2 = |t: f64| {
        let (px, py) = point(t);
        (px - x).powi(2) + (py - y).powi(2)
    };
    // Generic initial guess, nudged off the axes where f has spurious roots.
    let mut t = (a * y.max(1e-12)).atan2(b * x.max(1e-12));
    let mut converged = false;
    for _ in 0..50 {
        let (s, c) = (t.sin(), t.cos());
        let f = (a * a - b * b) * c * s - x * a * s + y * b * c;
        let df = (a * a - b * b) * (c * c - s * s) - x * a * c - y * b * s;
        if df == 0.0 {
            break;
        }
        let step = f / df;
        t = (t - step).clamp(0.0, std::f64::consts::FRAC_PI_2);
        if step.abs() < 1e-12 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SolverFailure("ellipse projection Newton stagnated".into()));
    }
    // The axis endpoints can beat the interior critical point for points
    // inside the evolute.
    let mut best = t;
    for cand in [0.0, std::f64::consts::FRAC_PI_2] {
        if dist2(cand) < dist2(best) {
            best = cand;
        }
    }
    Ok(point(best))
}

/// Closed interface polyline with per-point outward normals (from Ω⁻ into
/// Ω⁺), curvature in the `κ = -Δd` convention, and cumulative arclength.
#[derive(Clone, Debug)]
pub struct InterfacePolyline {
    pub points: Vec<(f64, f64)>,
    pub normals: Vec<(f64, f64)>,
    pub curvature: Vec<f64>,
    pub arclengths: Vec<f64>,
}

impl InterfacePolyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|k| {
                let p0 = self.points[k];
                let p1 = self.points[(k + 1) % n];
                ((p1.0 - p0.0).powi(2) + (p1.1 - p0.1).powi(2)).sqrt()
            })
            .sum()
    }

    fn signed_area(&self) -> f64 {
        let n = self.points.len();
        0.5 * (0..n)
            .map(|k| {
                let p0 = self.points[k];
                let p1 = self.points[(k + 1) % n];
                p0.0 * p1.1 - p1.0 * p0.1
            })
            .sum::<f64>()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
enum EdgeKey {
    H(usize, usize),
    V(usize, usize),
}

/// Extract the single closed zero contour of a nodal field by marching
/// squares with linear interpolation, and orient its normals from the
/// negative phase into the positive one.
pub fn extract_zero_contour(grid: &Grid2D, field: &Field) -> Result<InterfacePolyline> {
    grid.check_shape(field)?;
    let n = grid.n;
    let pos = |v: f64| v >= 0.0;
    let crossing = |v0: f64, v1: f64| v0 / (v0 - v1);

    use std::collections::HashMap;
    let mut point_of: HashMap<EdgeKey, (f64, f64)> = HashMap::new();
    let mut links: HashMap<EdgeKey, Vec<EdgeKey>> = HashMap::new();

    let mut cut = |key: EdgeKey, grid: &Grid2D, field: &Field| -> EdgeKey {
        point_of.entry(key).or_insert_with(|| match key {
            EdgeKey::H(i, j) => {
                let t = crossing(field[[i, j]], field[[i + 1, j]]);
                (grid.x(i) + t * grid.h, grid.x(j))
            }
            EdgeKey::V(i, j) => {
                let t = crossing(field[[i, j]], field[[i, j + 1]]);
                (grid.x(i), grid.x(j) + t * grid.h)
            }
        });
        key
    };

    let mut any_pos = false;
    let mut any_neg = false;
    for v in field.iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite("contour field".into()));
        }
        if pos(*v) {
            any_pos = true;
        } else {
            any_neg = true;
        }
    }
    if !any_pos || !any_neg {
        return Err(Error::NoInterface("field does not change sign".into()));
    }

    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let v00 = field[[i, j]];
            let v10 = field[[i + 1, j]];
            let v01 = field[[i, j + 1]];
            let v11 = field[[i + 1, j + 1]];
            let (b00, b10, b01, b11) = (pos(v00), pos(v10), pos(v01), pos(v11));
            if b00 == b10 && b00 == b01 && b00 == b11 {
                continue;
            }
            let bottom = b00 != b10;
            let top = b01 != b11;
            let left = b00 != b01;
            let right = b10 != b11;
            let mut segs: Vec<(EdgeKey, EdgeKey)> = Vec::new();
            let bk = EdgeKey::H(i, j);
            let tk = EdgeKey::H(i, j + 1);
            let lk = EdgeKey::V(i, j);
            let rk = EdgeKey::V(i + 1, j);
            match (bottom, right, top, left) {
                (true, true, true, true) => {
                    // Saddle: resolve connectivity by the center sign.
                    let center = 0.25 * (v00 + v10 + v01 + v11);
                    if pos(center) == b00 {
                        segs.push((bk, rk));
                        segs.push((tk, lk));
                    } else {
                        segs.push((bk, lk));
                        segs.push((tk, rk));
                    }
                }
                _ => {
                    let cuts: Vec<EdgeKey> = [(bottom, bk), (right, rk), (top, tk), (left, lk)]
                        .iter()
                        .filter(|(c, _)| *c)
                        .map(|(_, k)| *k)
                        .collect();
                    if cuts.len() == 2 {
                        segs.push((cuts[0], cuts[1]));
                    } else {
                        return Err(Error::InterfaceTopology(format!(
                            "cell ({i},{j}) has {} cut edges",
                            cuts.len()
                        )));
                    }
                }
            }
            for (a, b) in segs {
                let a = cut(a, grid, field);
                let b = cut(b, grid, field);
                links.entry(a).or_default().push(b);
                links.entry(b).or_default().push(a);
            }
        }
    }

    if links.is_empty() {
        return Err(Error::NoInterface("no zero crossings found".into()));
    }
    for (k, nbrs) in &links {
        if nbrs.len() != 2 {
            return Err(Error::InterfaceTopology(format!(
                "contour touches the boundary or branches at {k:?} ({} links)",
                nbrs.len()
            )));
        }
    }

    // Walk the loop from a deterministic edge (map order is randomized).
    let start = *links.keys().min().unwrap();
    let mut order = vec![start];
    let mut prev = start;
    let mut current = links[&start][0];
    while current != start {
        order.push(current);
        let nbrs = &links[&current];
        let next = if nbrs[0] == prev { nbrs[1] } else { nbrs[0] };
        prev = current;
        current = next;
    }
    if order.len() < links.len() {
        return Err(Error::InterfaceTopology(format!(
            "multiple interface components ({} of {} edges in first loop)",
            order.len(),
            links.len()
        )));
    }

    // Drop points that coincide (cuts through grid nodes create duplicates).
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(order.len());
    let min_sep = 0.05 * grid.h;
    for key in order {
        let p = point_of[&key];
        if let Some(&last) = points.last() {
            if (p.0 - last.0).abs() < min_sep && (p.1 - last.1).abs() < min_sep {
                continue;
            }
        }
        points.push(p);
    }
    while points.len() > 1 {
        let first = points[0];
        let last = *points.last().unwrap();
        if (first.0 - last.0).abs() < min_sep && (first.1 - last.1).abs() < min_sep {
            points.pop();
        } else {
            break;
        }
    }
    if points.len() < 8 {
        return Err(Error::InterfaceTopology("contour has too few points".into()));
    }

    let mut poly = curvature_normals(InterfacePolyline {
        points,
        normals: Vec::new(),
        curvature: Vec::new(),
        arclengths: Vec::new(),
    })?;

    // The canonical orientation assumes the enclosed phase is negative;
    // flip if the field says otherwise.
    let probe = poly.points[0];
    let nu = poly.normals[0];
    let eps = 1.5 * grid.h;
    let side = |s: f64| {
        grid.sample_bilinear(
            field,
            (probe.0 + s * eps * nu.0).clamp(0.0, grid.length),
            (probe.1 + s * eps * nu.1).clamp(0.0, grid.length),
        )
    };
    if side(1.0)? < side(-1.0)? {
        for nu in poly.normals.iter_mut() {
            *nu = (-nu.0, -nu.1);
        }
        for k in poly.curvature.iter_mut() {
            *k = -*k;
        }
    }
    Ok(poly)
}

/// Recompute normals, curvature, and arclength of a closed polyline.
///
/// The orientation is canonicalized to counterclockwise, normals point away
/// from the enclosed region, and curvature comes from the turning angle of
/// consecutive segments (5-point smoothed), so an enclosed negative phase
/// gives `κ = -1/R` on a circle of radius R.
pub fn curvature_normals(mut poly: InterfacePolyline) -> Result<InterfacePolyline> {
    let n = poly.points.len();
    if n < 16 {
        return Err(Error::Precondition(format!("polyline has {n} < 16 points")));
    }
    if poly.signed_area() < 0.0 {
        poly.points.reverse();
    }
    for k in 0..n {
        let p0 = poly.points[k];
        let p1 = poly.points[(k + 1) % n];
        if p0 == p1 {
            return Err(Error::Precondition(format!("duplicate consecutive points at {k}")));
        }
    }

    let pts = &poly.points;
    let seg: Vec<(f64, f64, f64)> = (0..n)
        .map(|k| {
            let p0 = pts[k];
            let p1 = pts[(k + 1) % n];
            let (dx, dy) = (p1.0 - p0.0, p1.1 - p0.1);
            let len = (dx * dx + dy * dy).sqrt();
            (dx / len, dy / len, len)
        })
        .collect();

    let mut normals = Vec::with_capacity(n);
    let mut raw_curv = Vec::with_capacity(n);
    // Circumcircle (Menger) stencil half-width: wide enough that the sagitta
    // dominates the interpolation jitter of extracted contours.
    let m = (n / 32).clamp(2, 12) as i64;
    for k in 0..n {
        let prev = &seg[(k + n - 1) % n];
        let next = &seg[k];
        // Vertex tangent: average of adjacent segment directions.
        let (mut tx, mut ty) = (prev.0 + next.0, prev.1 + next.1);
        let tn = (tx * tx + ty * ty).sqrt();
        if tn == 0.0 {
            return Err(Error::Precondition(format!("cusp at polyline point {k}")));
        }
        tx /= tn;
        ty /= tn;
        // Right-hand normal: outward for a counterclockwise loop.
        normals.push((ty, -tx));
        // Signed circumcircle curvature through p_{k-m}, p_k, p_{k+m};
        // a left turn (counterclockwise) is negative in our convention.
        let a = pts[((k as i64 - m).rem_euclid(n as i64)) as usize];
        let b = pts[k];
        let c = pts[((k as i64 + m).rem_euclid(n as i64)) as usize];
        let (abx, aby) = (b.0 - a.0, b.1 - a.1);
        let (acx, acy) = (c.0 - a.0, c.1 - a.1);
        let (bcx, bcy) = (c.0 - b.0, c.1 - b.1);
        let cross = abx * acy - aby * acx;
        let lab = (abx * abx + aby * aby).sqrt();
        let lac = (acx * acx + acy * acy).sqrt();
        let lbc = (bcx * bcx + bcy * bcy).sqrt();
        if lab == 0.0 || lac == 0.0 || lbc == 0.0 {
            return Err(Error::Precondition(format!("degenerate curvature stencil at {k}")));
        }
        raw_curv.push(-2.0 * cross / (lab * lac * lbc));
    }

    // 5-point moving average against marching-squares jitter, weighted by
    // the local spacing.
    let mut curvature = Vec::with_capacity(n);
    for k in 0..n {
        let mut num = 0.0;
        let mut den = 0.0;
        for off in -2_i64..=2 {
            let idx = ((k as i64 + off).rem_euclid(n as i64)) as usize;
            let w = 0.5 * (seg[idx].2 + seg[(idx + n - 1) % n].2);
            num += w * raw_curv[idx];
            den += w;
        }
        curvature.push(num / den);
    }

    let mut arclengths = Vec::with_capacity(n);
    let mut acc = 0.0;
    for k in 0..n {
        arclengths.push(acc);
        acc += seg[k].2;
    }

    poly.normals = normals;
    poly.curvature = curvature;
    poly.arclengths = arclengths;
    Ok(poly)
}

/// Bilinear samples at `p ± offset ν` and `p ± (offset + h) ν`, the one-sided
/// directional derivatives along `ν`, and their jump (plus minus minus).
pub fn one_sided_sample(
    grid: &Grid2D,
    field: &Field,
    p: (f64, f64),
    nu: (f64, f64),
    offset: f64,
) -> Result<(f64, f64, f64)> {
    let norm = (nu.0 * nu.0 + nu.1 * nu.1).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("|nu| = {norm} is not 1")));
    }
    if offset < 2.0 * grid.h {
        return Err(Error::Precondition(format!(
            "offset {offset} below 2h = {}",
            2.0 * grid.h
        )));
    }
    let h = grid.h;
    let at = |s: f64| grid.sample_bilinear(field, p.0 + s * nu.0, p.1 + s * nu.1);
    let plus = at(offset)?;
    let plus_far = at(offset + h)?;
    let minus = at(-offset)?;
    let minus_far = at(-(offset + h))?;
    let d_plus = (plus_far - plus) / h;
    let d_minus = (minus - minus_far) / h;
    Ok((plus, minus, d_plus - d_minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn circle() -> SignedDistanceMap {
        sdf(Shape::Circle { center: (0.5, 0.5), r: 0.25 }).unwrap()
    }

    #[test]
    fn circle_sdf_values() {
        let m = circle();
        assert_eq!(m.eval(0.5, 0.5).unwrap().0, -0.25);
        assert!((m.eval(1.0, 0.5).unwrap().0 - 0.25).abs() < 1e-15);
        let (d, p) = m.eval(0.9, 0.5).unwrap();
        assert!((d - 0.15).abs() < 1e-15);
        assert!((p.0 - 0.75).abs() < 1e-15 && (p.1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ellipse_degenerates_to_circle() {
        let e = sdf(Shape::Ellipse { center: (0.5, 0.5), a: 0.25, b: 0.25 }).unwrap();
        let c = circle();
        for &(x, y) in &[(0.9, 0.6), (0.5, 0.1), (0.62, 0.55), (0.3, 0.3)] {
            let de = e.eval(x, y).unwrap().0;
            let dc = c.eval(x, y).unwrap().0;
            assert!((de - dc).abs() < 1e-12, "({x},{y}): {de} vs {dc}");
        }
    }

    #[test]
    fn ellipse_projection_on_curve() {
        let e = sdf(Shape::Ellipse { center: (0.0, 0.0), a: 0.4, b: 0.2 }).unwrap();
        for &(x, y) in &[(0.5, 0.3), (-0.1, 0.05), (0.3, -0.4), (0.05, 0.0), (0.0, 0.0)] {
            let (d, p) = e.eval(x, y).unwrap();
            let on = (p.0 / 0.4).powi(2) + (p.1 / 0.2).powi(2);
            assert!((on - 1.0).abs() < 1e-9, "projection off curve at ({x},{y}): {on}");
            let dist = ((x - p.0).powi(2) + (y - p.1).powi(2)).sqrt();
            assert!((d.abs() - dist).abs() < 1e-9);
        }
    }

    #[test]
    fn eikonal_in_tube() {
        let e = sdf(Shape::Ellipse { center: (0.5, 0.5), a: 0.3, b: 0.2 }).unwrap();
        for k in 0..40 {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 40.0;
            // Points offset from the curve by less than min(a, b)/2.
            let (x, y) = (0.5 + 0.36 * t.cos(), 0.5 + 0.26 * t.sin());
            let (gx, gy) = e.gradient(x, y).unwrap();
            let norm = (gx * gx + gy * gy).sqrt();
            assert!((norm - 1.0).abs() < 1e-6, "grad norm {norm} at angle {t}");
        }
    }

    fn circle_field(n: usize) -> (Grid2D, Field) {
        let g = Grid2D::new(n, 1.0).unwrap();
        let m = circle();
        let f = g.from_fn(|x, y| m.eval(x, y).unwrap().0);
        (g, f)
    }

    #[test]
    fn extract_circle_radius() {
        let (g, f) = circle_field(129);
        let poly = extract_zero_contour(&g, &f).unwrap();
        let radii: Vec<f64> = poly
            .points
            .iter()
            .map(|p| ((p.0 - 0.5).powi(2) + (p.1 - 0.5).powi(2)).sqrt())
            .collect();
        let mean = radii.iter().sum::<f64>() / radii.len() as f64;
        assert!((mean - 0.25).abs() < 1e-3, "mean radius {mean}");
        let worst = radii.iter().fold(0.0_f64, |m, r| m.max((r - 0.25).abs()));
        assert!(worst <= 2.0 * g.h, "max radius error {worst}");
        // Outward normals.
        for (p, nu) in poly.points.iter().zip(&poly.normals) {
            let r = ((p.0 - 0.5).powi(2) + (p.1 - 0.5).powi(2)).sqrt();
            let dot = nu.0 * (p.0 - 0.5) / r + nu.1 * (p.1 - 0.5) / r;
            assert!(dot > 0.9, "normal not outward: dot {dot}");
        }
    }

    #[test]
    fn extract_tanh_profile_same_zero_set() {
        let g = Grid2D::new(129, 1.0).unwrap();
        let m = circle();
        let eps = 0.04;
        let f = g.from_fn(|x, y| (2.0_f64.sqrt() * m.eval(x, y).unwrap().0 / eps).tanh());
        let poly = extract_zero_contour(&g, &f).unwrap();
        for p in &poly.points {
            let d = m.eval(p.0, p.1).unwrap().0;
            assert!(d.abs() < 1e-3, "zero-set deviation {d}");
        }
    }

    #[test]
    fn extract_errors() {
        let g = Grid2D::new(33, 1.0).unwrap();
        let f = g.from_fn(|_, _| 1.0);
        assert!(matches!(extract_zero_contour(&g, &f), Err(Error::NoInterface(_))));
        // Vertical stripe: open contour through the boundary.
        let f = g.from_fn(|x, _| x - 0.5);
        assert!(matches!(extract_zero_contour(&g, &f), Err(Error::InterfaceTopology(_))));
        // Two circles: multiple components.
        let f = g.from_fn(|x, y| {
            let d1 = ((x - 0.25).powi(2) + (y - 0.25).powi(2)).sqrt() - 0.1;
            let d2 = ((x - 0.75).powi(2) + (y - 0.75).powi(2)).sqrt() - 0.1;
            d1.min(d2)
        });
        assert!(matches!(extract_zero_contour(&g, &f), Err(Error::InterfaceTopology(_))));
    }

    #[test]
    fn curvature_of_circle() {
        let (g, f) = circle_field(129);
        let poly = extract_zero_contour(&g, &f).unwrap();
        for &k in &poly.curvature {
            assert!((k + 4.0).abs() < 0.08, "kappa {k} should be -4 within 2%");
        }
        // Gauss-Bonnet: ∮ κ ds = -2π.
        let n = poly.len();
        let mut total = 0.0;
        for k in 0..n {
            let p0 = poly.points[k];
            let p1 = poly.points[(k + 1) % n];
            let ds = ((p1.0 - p0.0).powi(2) + (p1.1 - p0.1).powi(2)).sqrt();
            total += poly.curvature[k] * ds;
        }
        let expected = -2.0 * std::f64::consts::PI;
        assert!((total - expected).abs() < 0.01 * expected.abs(), "∮κ ds = {total}");
    }

    #[test]
    fn curvature_flat_limit() {
        // Large circle: locally straight, κ = -1/R ≈ 0 within 1e-2.
        let n = 512;
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                (200.0 * t.cos(), 200.0 * t.sin())
            })
            .collect();
        let poly = curvature_normals(InterfacePolyline {
            points: pts,
            normals: Vec::new(),
            curvature: Vec::new(),
            arclengths: Vec::new(),
        })
        .unwrap();
        for &k in &poly.curvature {
            assert!(k.abs() < 1e-2);
        }
    }

    #[test]
    fn reversal_is_canonicalized() {
        let (g, f) = circle_field(65);
        let poly = extract_zero_contour(&g, &f).unwrap();
        let mut reversed = poly.points.clone();
        reversed.reverse();
        let again = curvature_normals(InterfacePolyline {
            points: reversed,
            normals: Vec::new(),
            curvature: Vec::new(),
            arclengths: Vec::new(),
        })
        .unwrap();
        // Same orientation after canonicalization: outward normals, κ < 0.
        for (p, nu) in again.points.iter().zip(&again.normals) {
            let r = ((p.0 - 0.5).powi(2) + (p.1 - 0.5).powi(2)).sqrt();
            let dot = nu.0 * (p.0 - 0.5) / r + nu.1 * (p.1 - 0.5) / r;
            assert!(dot > 0.9);
        }
        assert!(again.curvature.iter().all(|&k| k < 0.0));
    }

    #[test]
    fn inverted_phase_flips_normals_and_curvature() {
        // Positive inside the disc: Ω⁻ is the exterior, so normals point
        // into the disc's complement... i.e. toward the center, and κ = +1/R.
        let g = Grid2D::new(129, 1.0).unwrap();
        let m = circle();
        let f = g.from_fn(|x, y| -m.eval(x, y).unwrap().0);
        let poly = extract_zero_contour(&g, &f).unwrap();
        for (p, nu) in poly.points.iter().zip(&poly.normals) {
            let r = ((p.0 - 0.5).powi(2) + (p.1 - 0.5).powi(2)).sqrt();
            let dot = nu.0 * (p.0 - 0.5) / r + nu.1 * (p.1 - 0.5) / r;
            assert!(dot < -0.9, "normal should point inward, dot {dot}");
        }
        for &k in &poly.curvature {
            assert!((k - 4.0).abs() < 0.08, "kappa {k} should be +4");
        }
    }

    #[test]
    fn one_sided_cone() {
        let g = Grid2D::new(129, 1.0).unwrap();
        let f = g.from_fn(|x, y| ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt());
        let p = (0.75, 0.5);
        let (_, _, jump) = one_sided_sample(&g, &f, p, (1.0, 0.0), 3.0 * g.h).unwrap();
        assert!(jump.abs() < 1e-10, "cone is smooth across: jump {jump}");
    }

    #[test]
    fn one_sided_kink() {
        let g = Grid2D::new(129, 1.0).unwrap();
        let m = circle();
        let f = g.from_fn(|x, y| m.eval(x, y).unwrap().0.abs());
        let p = (0.75, 0.5);
        let (_, _, jump) = one_sided_sample(&g, &f, p, (1.0, 0.0), 3.0 * g.h).unwrap();
        assert!((jump - 2.0).abs() < 1e-8, "|d| slope jump should be 2, got {jump}");
    }

    #[test]
    fn one_sided_constant_and_errors() {
        let g = Grid2D::new(65, 1.0).unwrap();
        let f = g.from_fn(|_, _| 7.0);
        let (p, m, j) = one_sided_sample(&g, &f, (0.5, 0.5), (0.0, 1.0), 3.0 * g.h).unwrap();
        assert_eq!((p, m, j), (7.0, 7.0, 0.0));
        assert!(one_sided_sample(&g, &f, (0.5, 0.5), (0.0, 1.0), 0.5 * g.h).is_err());
        assert!(one_sided_sample(&g, &f, (0.5, 0.5), (0.0, 2.0), 3.0 * g.h).is_err());
        assert!(one_sided_sample(&g, &f, (0.98, 0.5), (1.0, 0.0), 3.0 * g.h).is_err());
    }

    #[test]
    fn polyline_sdf_sign() {
        let n = 64;
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                (0.5 + 0.25 * t.cos(), 0.5 + 0.25 * t.sin())
            })
            .collect();
        let m = sdf(Shape::Polyline(pts)).unwrap();
        assert!(m.eval(0.5, 0.5).unwrap().0 < 0.0);
        assert!(m.eval(0.9, 0.9).unwrap().0 > 0.0);
        let (d, _) = m.eval(0.8, 0.5).unwrap();
        assert!((d - 0.05).abs() < 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn extract_radius_error_below_h(
            cx in 0.42..0.58f64, cy in 0.42..0.58f64, r in 0.15..0.3f64,
        ) {
            let g = Grid2D::new(97, 1.0).unwrap();
            let m = sdf(Shape::Circle { center: (cx, cy), r }).unwrap();
            let f = g.from_fn(|x, y| m.eval(x, y).unwrap().0);
            let poly = extract_zero_contour(&g, &f).unwrap();
            let mean = poly
                .points
                .iter()
                .map(|p| ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt())
                .sum::<f64>() / poly.len() as f64;
            prop_assert!((mean - r).abs() <= g.h);
        }
    }
}
