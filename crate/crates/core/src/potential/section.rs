//! Centred sub-level sets.

use serde::{Deserialize, Serialize};

use super::{PiecewiseAffineConvex, PotentialError};
use crate::geometry::{ConvexPolygon, EdgeLabel, LabeledPolygon, Point2};

/// `{y : f(y) < f(y0) + (y - y0) . shift + height}` with centroid at `center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenteredSection {
    pub center: Point2,
    pub height: f64,
    pub shift: Point2,
    pub region: ConvexPolygon,
    /// Largest `c` with `center - c (y - center)` in the region for every vertex `y`.
    pub balance: f64,
    /// `max (f(y) - f(center) - (y - center) . p0) / height` over the region,
    /// with `p0` a subgradient at the center.
    pub height_constant: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct SectionOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub damping: f64,
}

impl Default for SectionOptions {
    fn default() -> Self {
        SectionOptions {
            tol: 1e-6,
            max_iters: 200,
            damping: 0.5,
        }
    }
}

/// The sub-level polygon for a fixed slope, built inside `bounds`.
///
/// Fails with `SectionUnbounded` if the set reaches the boundary of `bounds`.
pub fn section_region(
    f: &PiecewiseAffineConvex,
    y0: Point2,
    shift: Point2,
    h: f64,
    bounds: &ConvexPolygon,
) -> Result<ConvexPolygon, PotentialError> {
    let idx = f.index();
    let (g, c) = (f.gradients(), f.intercepts());
    let level = f.evaluate(y0) - y0.dot(shift) + h;
    let slack = 1e-12 * (1.0 + level.abs());
    let mut p = LabeledPolygon::from_convex(bounds);
    let mut guard = 0;
    loop {
        let mut changed = false;
        for v in p.points.clone() {
            let (j, val) = idx.argmax(v);
            if val - shift.dot(v) > level + slack {
                p.clip(g[j] - shift, level - c[j], EdgeLabel::Piece(j as u32));
                changed = true;
            }
        }
        guard += 1;
        if !changed || p.is_empty() || guard > 10_000 {
            break;
        }
    }
    if p.labels.iter().any(|l| matches!(l, EdgeLabel::Boundary(_))) {
        return Err(PotentialError::SectionUnbounded);
    }
    Ok(p.to_convex())
}

/// Distance along `d` from `o` to the boundary of a convex polygon containing `o`.
fn ray_exit(poly: &ConvexPolygon, o: Point2, d: Point2) -> f64 {
    let v = poly.vertices();
    let n = v.len();
    let mut t = f64::INFINITY;
    for i in 0..n {
        let a = v[i];
        let e = v[(i + 1) % n] - a;
        // inside: e x (o + t d - a) >= 0
        let num = e.cross(o - a);
        let den = e.cross(d);
        if den < 0.0 {
            t = t.min(num / -den);
        }
    }
    t.max(0.0)
}

/// Finds the slope making the section centroid coincide with `y0`.
///
/// Damped fixed-point iteration on the slope; the section's second moment
/// gives the local Hessian scale.
pub fn centered_section(
    f: &PiecewiseAffineConvex,
    y0: Point2,
    h: f64,
    bounds: &ConvexPolygon,
    opts: &SectionOptions,
) -> Result<CenteredSection, PotentialError> {
    assert!(h > 0.0);
    let f0 = f.evaluate(y0);
    let p0 = super::subdifferential_at(f, y0, 1e-9).hull.centroid();
    let mut shift = p0;
    let mut lambda = opts.damping;
    let mut prev = f64::INFINITY;
    let mut last = f64::INFINITY;
    for it in 0..opts.max_iters {
        let region = section_region(f, y0, shift, h, bounds)?;
        let (area, cen, m) = region.moments();
        if area <= 0.0 {
            return Err(PotentialError::DegenerateDomain("empty section".into()));
        }
        let off = cen - y0;
        let err = off.norm();
        last = err;
        if err <= opts.tol * region.diameter() {
            let balance = region
                .vertices()
                .iter()
                .map(|&y| {
                    let d = y0 - y;
                    let l = d.norm();
                    if l == 0.0 {
                        f64::INFINITY
                    } else {
                        ray_exit(&region, y0, d / l) / l
                    }
                })
                .fold(f64::INFINITY, f64::min);
            let height_constant = region
                .vertices()
                .iter()
                .map(|&y| (f.evaluate(y) - f0 - (y - y0).dot(p0)) / h)
                .fold(0.0, f64::max);
            return Ok(CenteredSection {
                center: y0,
                height: h,
                shift,
                region,
                balance,
                height_constant,
                iterations: it,
            });
        }
        if err > prev {
            lambda *= 0.5;
        }
        prev = err;
        let (sxx, sxy, syy) = (m[0] / area, m[1] / area, m[2] / area);
        let det = sxx * syy - sxy * sxy;
        if !(det > 0.0) {
            return Err(PotentialError::DegenerateDomain("flat section".into()));
        }
        // shift -= lambda (h / 2) Σ^{-1} off
        let s = Point2::new(syy * off.x - sxy * off.y, -sxy * off.x + sxx * off.y) / det;
        shift -= s * (lambda * h / 2.0);
    }
    Err(PotentialError::NoConvergence {
        iters: opts.max_iters,
        offset: last,
    })
}
