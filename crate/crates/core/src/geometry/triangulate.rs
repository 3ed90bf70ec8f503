use super::point::Point2;
use super::polygon::Polygon;
use super::GeometryError;

/// Triangles of a validated polygon; every triangle vertex is a polygon vertex.
pub fn triangulate(poly: &Polygon) -> Vec<[Point2; 3]> {
    poly.triangles().to_vec()
}

fn in_triangle(p: Point2, a: Point2, b: Point2, c: Point2) -> bool {
    let d1 = (b - a).cross(p - a);
    let d2 = (c - b).cross(p - b);
    let d3 = (a - c).cross(p - c);
    d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0
}

/// Ear clipping on a simple CCW polygon. Collinear vertices are removed
/// without emitting a triangle.
pub(crate) fn ear_clip(v: &[Point2]) -> Result<Vec<[Point2; 3]>, GeometryError> {
    let scale = v.iter().fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs())).max(1e-300);
    let eps = 1e-14 * scale * scale;
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let mut out = Vec::with_capacity(v.len().saturating_sub(2));
    while idx.len() > 3 {
        let n = idx.len();
        let mut clipped = false;
        for k in 0..n {
            let (ia, ib, ic) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            let (a, b, c) = (v[ia], v[ib], v[ic]);
            let turn = (b - a).cross(c - b);
            if turn.abs() <= eps && (b - a).dot(c - b) > 0.0 {
                idx.remove(k);
                clipped = true;
                break;
            }
            if turn <= eps {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                j != ia && j != ib && j != ic && v[j] != a && v[j] != b && v[j] != c && in_triangle(v[j], a, b, c)
            });
            if !blocked {
                out.push([a, b, c]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return Err(GeometryError::TriangulationFailure);
        }
    }
    let (a, b, c) = (v[idx[0]], v[idx[1]], v[idx[2]]);
    if (b - a).cross(c - a) > eps {
        out.push([a, b, c]);
    }
    if out.is_empty() {
        return Err(GeometryError::TriangulationFailure);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn area(t: &[Point2; 3]) -> f64 {
        (t[1] - t[0]).cross(t[2] - t[0]) / 2.0
    }

    #[test]
    fn triangles_cover_fixtures() {
        for poly in [fixtures::unit_square(), fixtures::l_shape(), fixtures::hexagon(), fixtures::dumbbell()] {
            let tris = triangulate(&poly);
            let total: f64 = tris.iter().map(area).sum();
            assert!((total - poly.area()).abs() <= 1e-12 * poly.area());
            assert!(tris.iter().all(|t| area(t) > 0.0));
            for t in &tris {
                for q in t {
                    assert!(poly.vertices().contains(q));
                }
            }
        }
    }

    #[test]
    fn collinear_vertex_is_skipped() {
        let p = Polygon::from_coords(&[(0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        let tris = triangulate(&p);
        let total: f64 = tris.iter().map(area).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }
}
