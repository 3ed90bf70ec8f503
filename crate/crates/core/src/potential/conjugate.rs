use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::cells::{cells_in_polygon, dedup_points};
use super::{AffineFunc, PiecewiseAffineConvex};
use crate::geometry::{ConvexPolygon, Point2, Polygon};

/// Slopes supporting `f` at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubdifferentialCell {
    pub at: Point2,
    pub hull: ConvexPolygon,
}

/// Vertices of the subdivision of `domain` into (cell of `f`) ∩ (triangle of `domain`).
///
/// This includes genuine vertices of the subdivision induced by `f`, the
/// vertices of `domain`, and points where cell edges cross the domain
/// triangulation.
pub fn subdivision_vertices(f: &PiecewiseAffineConvex, domain: &Polygon) -> Vec<Point2> {
    let mut pts = Vec::new();
    for (_, cell) in cells_in_polygon(f.index(), domain) {
        pts.extend_from_slice(cell.vertices());
    }
    let tol = 1e-12 * domain.diameter().max(1e-300);
    dedup_points(&pts, tol)
}

/// Convex conjugate of `f` restricted to `domain`:
/// `y -> max over x in domain of x . y - f(x)`.
///
/// `x . y - f(x)` is affine on each piece of the subdivision, so the sup is
/// attained at one of its vertices and the result is exact.
pub fn legendre(f: &PiecewiseAffineConvex, domain: &Polygon) -> PiecewiseAffineConvex {
    let pieces: Vec<AffineFunc> = subdivision_vertices(f, domain)
        .into_iter()
        .map(|x| AffineFunc::new(x, -f.evaluate(x)))
        .collect();
    PiecewiseAffineConvex::new(pieces).expect("domain has vertices").pruned()
}

/// Convex hull of the gradients; the conjugate of `f` over the whole plane is
/// finite exactly here.
pub fn effective_domain(f: &PiecewiseAffineConvex) -> ConvexPolygon {
    ConvexPolygon::hull(f.gradients())
}

/// Hull of gradients of pieces active at `x` within `tol * (1 + |f(x)|)`.
pub fn subdifferential_at(f: &PiecewiseAffineConvex, x: Point2, tol: f64) -> SubdifferentialCell {
    let g = f.gradients();
    let pts: Vec<Point2> = f.active(x, tol).into_iter().map(|j| g[j]).collect();
    SubdifferentialCell {
        at: x,
        hull: ConvexPolygon::hull(&pts),
    }
}

/// Lebesgue measure of the gradient image of `region`.
///
/// Only subdivision vertices have two-dimensional subdifferentials, so the
/// measure is the sum of their hull areas. A vertex on a triangulation
/// diagonal of a nonconvex region is found once per triangle, so vertices are
/// identified by their active pieces.
pub fn ma_measure(f: &PiecewiseAffineConvex, region: &Polygon) -> f64 {
    let g = f.gradients();
    let mut seen = BTreeSet::new();
    let mut total = 0.0;
    for v in subdivision_vertices(f, region) {
        let mut active = f.active(v, 1e-9);
        active.sort_unstable();
        if active.len() >= 3 && seen.insert(active.clone()) {
            let pts: Vec<Point2> = active.iter().map(|&j| g[j]).collect();
            total += ConvexPolygon::hull(&pts).area();
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn quadratic(k: usize) -> PiecewiseAffineConvex {
        let pts: Vec<Point2> = (0..=k)
            .flat_map(|i| (0..=k).map(move |j| p(-2.0 + 4.0 * i as f64 / k as f64, -2.0 + 4.0 * j as f64 / k as f64)))
            .collect();
        PiecewiseAffineConvex::from_tangents(&pts, |x| (0.5 * x.norm2(), x)).unwrap()
    }

    #[test]
    fn quadratic_is_nearly_self_dual() {
        let f = quadratic(40);
        let d = fixtures::square(-1.5, -1.5, 3.0);
        let fs = legendre(&f, &d);
        for y in [p(0.0, 0.0), p(0.3, -0.7), p(1.0, 1.0), p(-1.2, 0.4)] {
            assert!((fs.evaluate(y) - 0.5 * y.norm2()).abs() < 5e-3, "{y:?}");
        }
    }

    #[test]
    fn linear_function_conjugate() {
        let a = p(1.0, 2.0);
        let f = PiecewiseAffineConvex::from_parts(&[a], &[0.0]).unwrap();
        let fs = legendre(&f, &fixtures::square(-1.0, -1.0, 2.0));
        assert!(fs.evaluate(a).abs() < 1e-15);
        let dom = effective_domain(&f);
        assert_eq!(dom.vertices(), &[a]);
    }

    #[test]
    fn hinge_conjugate_vanishes_on_segment() {
        let f = PiecewiseAffineConvex::from_parts(&[p(0.0, 0.0), p(1.0, 0.0)], &[0.0, 0.0]).unwrap();
        let fs = legendre(&f, &fixtures::square(-1.0, -1.0, 2.0));
        for t in [0.0, 0.25, 0.5, 1.0] {
            assert!(fs.evaluate(p(t, 0.0)).abs() < 1e-15);
        }
        assert_eq!(effective_domain(&f).len(), 2);
    }

    #[test]
    fn subdifferential_examples() {
        let abs = PiecewiseAffineConvex::from_parts(&[p(1.0, 0.0), p(-1.0, 0.0)], &[0.0, 0.0]).unwrap();
        let s = subdifferential_at(&abs, p(0.0, 0.0), 1e-9);
        assert_eq!(s.hull.len(), 2);
        assert!((s.hull.diameter() - 2.0).abs() < 1e-15);
        let s = subdifferential_at(&abs, p(1.0, 0.0), 1e-9);
        assert_eq!(s.hull.vertices(), &[p(1.0, 0.0)]);
        let tri = PiecewiseAffineConvex::from_parts(&[p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)], &[0.0; 3]).unwrap();
        let s = subdifferential_at(&tri, p(0.0, 0.0), 1e-9);
        assert_eq!(s.hull.len(), 3);
        assert!((s.hull.area() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn measure_examples() {
        let one = PiecewiseAffineConvex::from_parts(&[p(0.3, 0.1)], &[1.0]).unwrap();
        assert_eq!(ma_measure(&one, &fixtures::unit_square()), 0.0);
        let abs = PiecewiseAffineConvex::from_parts(&[p(1.0, 0.0), p(-1.0, 0.0)], &[0.0, 0.0]).unwrap();
        assert_eq!(ma_measure(&abs, &fixtures::hexagon()), 0.0);
        let tri = PiecewiseAffineConvex::from_parts(&[p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)], &[0.0; 3]).unwrap();
        assert!((ma_measure(&tri, &fixtures::hexagon()) - 0.5).abs() < 1e-15);
        // quadratic: gradient image of a region is the region itself, up to the lattice
        let f = quadratic(40);
        let m = ma_measure(&f, &fixtures::square(-1.0, -1.0, 2.0));
        assert!((m - 4.0).abs() < 0.5, "{m}");
    }

    #[test]
    fn involution_with_collinear_conjugate_pieces() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        // this stream once produced a conjugate whose cell walk stopped at a
        // degenerate cell and lost a corner region
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let d = fixtures::square(-1.0, -1.0, 2.0);
        for _ in 0..100 {
            let k = rng.gen_range(2..12);
            let g: Vec<Point2> = (0..k).map(|_| p(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let c: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let f = PiecewiseAffineConvex::from_parts(&g, &c).unwrap();
            let back = legendre(&legendre(&f, &d), &d);
            for x in subdivision_vertices(&f, &d) {
                assert!((back.evaluate(x) - f.evaluate(x)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn measure_counts_a_vertex_on_a_diagonal_once() {
        let region = fixtures::l_shape();
        let tris = region.triangles();
        let on_boundary = |a: Point2, b: Point2| {
            let v = region.vertices();
            (0..v.len()).any(|i| {
                let (p0, p1) = (v[i], v[(i + 1) % v.len()]);
                (p0 == a && p1 == b) || (p0 == b && p1 == a)
            })
        };
        let (a, b) = tris
            .iter()
            .flat_map(|t| (0..3).map(move |i| (t[i], t[(i + 1) % 3])))
            .find(|&(a, b)| !on_boundary(a, b))
            .expect("a diagonal");
        let y0 = a.lerp(b, 1.0 / 3.0);
        // vertex at y0 with a triangle of slopes of area 1/2
        let g = [p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)];
        let c: Vec<f64> = g.iter().map(|q| -q.dot(y0)).collect();
        let f = PiecewiseAffineConvex::from_parts(&g, &c).unwrap();
        assert!((ma_measure(&f, &region) - 0.5).abs() < 1e-12);
    }
}
