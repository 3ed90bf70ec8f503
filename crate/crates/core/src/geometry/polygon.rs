use serde::{Deserialize, Serialize};

use super::convex::{bbox, intersect_convex, shoelace, ConvexPolygon};
use super::point::{segment_crossing_param, segments_intersect, Point2, Segment};
use super::triangulate::ear_clip;
use super::GeometryError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

/// Wire form of a polygon: `{"vertices": [[x, y], ...], "holes": []}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolygonSpec {
    pub vertices: Vec<Point2>,
    #[serde(default)]
    pub holes: Vec<Vec<Point2>>,
}

/// A validated simple polygon with CCW vertices and no holes.
///
/// A triangulation is computed once at construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolygonSpec", into = "PolygonSpec")]
pub struct Polygon {
    vertices: Vec<Point2>,
    triangles: Vec<[Point2; 3]>,
    area: f64,
}

impl TryFrom<PolygonSpec> for Polygon {
    type Error = GeometryError;

    fn try_from(spec: PolygonSpec) -> Result<Self, Self::Error> {
        if !spec.holes.is_empty() {
            return Err(GeometryError::HolesUnsupported);
        }
        Polygon::new(spec.vertices)
    }
}

impl From<Polygon> for PolygonSpec {
    fn from(p: Polygon) -> Self {
        PolygonSpec {
            vertices: p.vertices,
            holes: Vec::new(),
        }
    }
}

/// Signed shoelace area of a raw vertex list.
pub fn polygon_area(vertices: &[Point2]) -> Result<f64, GeometryError> {
    if vertices.len() < 3 {
        return Err(GeometryError::DegeneratePolygon(format!(
            "{} vertices",
            vertices.len()
        )));
    }
    let a = shoelace(vertices);
    if a.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(GeometryError::DegeneratePolygon(format!("signed area {a}")));
    }
    Ok(a)
}

impl Polygon {
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        vertices.dedup();
        while vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(GeometryError::DegeneratePolygon(format!(
                "{} distinct vertices",
                vertices.len()
            )));
        }
        check_simple(&vertices)?;
        let mut a = shoelace(&vertices);
        if a < 0.0 {
            log::warn!("polygon given clockwise; reversing vertex order");
            vertices.reverse();
            a = -a;
        }
        let (lo, hi) = bbox(&vertices).expect("nonempty");
        let scale = (hi - lo).norm();
        if !(a > 1e-14 * scale * scale) {
            return Err(GeometryError::DegeneratePolygon(format!("area {a}")));
        }
        let triangles = ear_clip(&vertices)?;
        Ok(Polygon {
            vertices,
            triangles,
            area: a,
        })
    }

    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Self, GeometryError> {
        Polygon::new(coords.iter().map(|&c| Point2::from(c)).collect())
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vertex(&self, i: usize) -> Point2 {
        self.vertices[i % self.vertices.len()]
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> Segment {
        Segment::new(self.vertex(i), self.vertex(i + 1))
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        (0..self.len()).map(move |i| self.edge(i))
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn triangles(&self) -> &[[Point2; 3]] {
        &self.triangles
    }

    pub fn centroid(&self) -> Point2 {
        let mut c = Point2::ZERO;
        for t in &self.triangles {
            let a = (t[1] - t[0]).cross(t[2] - t[0]) / 2.0;
            c += (t[0] + t[1] + t[2]) * (a / 3.0);
        }
        c / self.area
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        bbox(&self.vertices).expect("nonempty")
    }

    pub fn diameter(&self) -> f64 {
        ConvexPolygon::hull(&self.vertices).diameter()
    }

    pub fn convex_hull(&self) -> ConvexPolygon {
        ConvexPolygon::hull(&self.vertices)
    }

    /// Interior angle at vertex `i` exceeds pi.
    pub fn is_concave_vertex(&self, i: usize) -> bool {
        let n = self.len();
        let p = self.vertex(i + n - 1);
        let q = self.vertex(i);
        let r = self.vertex(i + 1);
        (q - p).cross(r - q) < 0.0
    }

    pub fn concave_vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_concave_vertex(i)).collect()
    }

    pub fn is_convex(&self) -> bool {
        self.concave_vertices().is_empty()
    }

    /// The polygon as a convex polygon, if it is convex.
    pub fn as_convex(&self) -> Option<ConvexPolygon> {
        if self.is_convex() {
            Some(ConvexPolygon::from_ccw_unchecked(self.vertices.clone()))
        } else {
            None
        }
    }

    /// Unit normal of edge `i` pointing into the polygon.
    pub fn inner_normal(&self, i: usize) -> Point2 {
        self.edge(i).direction().perp().normalized().unwrap_or(Point2::ZERO)
    }

    /// Index of and distance to the closest edge.
    pub fn nearest_edge(&self, p: Point2) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, e) in self.edges().enumerate() {
            let d = e.distance_to_point(p);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    pub fn distance_to_boundary(&self, p: Point2) -> f64 {
        self.nearest_edge(p).1
    }

    pub fn locate(&self, p: Point2, tol: f64) -> Location {
        point_location(self, p, tol)
    }

    /// Closed containment with tolerance.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        self.locate(p, tol) != Location::Outside
    }

    /// Distance from `p` to the closed polygon (0 inside).
    pub fn distance_to_point(&self, p: Point2) -> f64 {
        if winding_inside(&self.vertices, p) {
            0.0
        } else {
            self.distance_to_boundary(p)
        }
    }

    /// Pieces of `self ∩ c`, one convex polygon per intersected triangle.
    pub fn intersect_convex(&self, c: &ConvexPolygon) -> Vec<ConvexPolygon> {
        let cb = c.bbox();
        self.triangles
            .iter()
            .filter(|t| match cb {
                Some((lo, hi)) => {
                    let tx0 = t[0].x.min(t[1].x).min(t[2].x);
                    let tx1 = t[0].x.max(t[1].x).max(t[2].x);
                    let ty0 = t[0].y.min(t[1].y).min(t[2].y);
                    let ty1 = t[0].y.max(t[1].y).max(t[2].y);
                    tx1 >= lo.x && tx0 <= hi.x && ty1 >= lo.y && ty0 <= hi.y
                }
                None => false,
            })
            .map(|t| intersect_convex(c, &ConvexPolygon::from_ccw_unchecked(t.to_vec())))
            .filter(|p| p.len() >= 3)
            .collect()
    }

    /// Area and centroid of `self ∩ c`.
    pub fn intersect_convex_moments(&self, c: &ConvexPolygon) -> (f64, Point2) {
        let mut a = 0.0;
        let mut m = Point2::ZERO;
        for piece in self.intersect_convex(c) {
            let pa = piece.area();
            a += pa;
            m += piece.centroid() * pa;
        }
        if a > 0.0 {
            (a, m / a)
        } else {
            (0.0, c.centroid())
        }
    }

    pub fn translated(&self, t: Point2) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|&v| v + t).collect(),
            triangles: self
                .triangles
                .iter()
                .map(|tr| [tr[0] + t, tr[1] + t, tr[2] + t])
                .collect(),
            area: self.area,
        }
    }

    /// Image under `x -> R x + t` for a rotation `R = [[c, -s], [s, c]]`.
    pub fn transformed(&self, cos: f64, sin: f64, t: Point2) -> Polygon {
        let f = |v: Point2| v.rotate(cos, sin) + t;
        Polygon {
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
            triangles: self
                .triangles
                .iter()
                .map(|tr| [f(tr[0]), f(tr[1]), f(tr[2])])
                .collect(),
            area: self.area,
        }
    }

    /// Uniformly scaled copy about the origin.
    pub fn scaled(&self, s: f64) -> Polygon {
        assert!(s > 0.0);
        Polygon {
            vertices: self.vertices.iter().map(|&v| v * s).collect(),
            triangles: self
                .triangles
                .iter()
                .map(|tr| [tr[0] * s, tr[1] * s, tr[2] * s])
                .collect(),
            area: self.area * s * s,
        }
    }
}

fn check_simple(v: &[Point2]) -> Result<(), GeometryError> {
    let n = v.len();
    let seg = |i: usize| Segment::new(v[i], v[(i + 1) % n]);
    for i in 0..n {
        let a = seg(i);
        let b = seg((i + 1) % n);
        // consecutive edges may only share their common vertex
        let d1 = a.direction();
        let d2 = b.direction();
        if d1.cross(d2) == 0.0 && d1.dot(d2) < 0.0 {
            return Err(GeometryError::NonSimple(format!("edges {i} and {} fold back", (i + 1) % n)));
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(&a, &seg(j)) {
                return Err(GeometryError::NonSimple(format!("edges {i} and {j} intersect")));
            }
        }
    }
    Ok(())
}

fn winding_inside(v: &[Point2], p: Point2) -> bool {
    let n = v.len();
    let mut wn = 0i32;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        let side = (b - a).cross(p - a);
        if a.y <= p.y {
            if b.y > p.y && side > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && side < 0.0 {
            wn -= 1;
        }
    }
    wn != 0
}

/// Boundary if within `tol` of an edge, otherwise decided by winding number.
pub fn point_location(poly: &Polygon, p: Point2, tol: f64) -> Location {
    if poly.distance_to_boundary(p) <= tol {
        Location::Boundary
    } else if winding_inside(&poly.vertices, p) {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// Total length of the parts of `s` lying outside `poly` (at tolerance `tol`).
pub fn uncovered_length(poly: &Polygon, s: &Segment, tol: f64) -> f64 {
    let len = s.length();
    if len == 0.0 {
        return 0.0;
    }
    let mut ts = vec![0.0, 1.0];
    for e in poly.edges() {
        if let Some(t) = segment_crossing_param(s, &e) {
            ts.push(t);
        }
    }
    for &v in poly.vertices() {
        let t = s.project_param(v);
        if t > 0.0 && t < 1.0 {
            ts.push(t);
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut out = 0.0;
    for w in ts.windows(2) {
        if w[1] - w[0] <= 0.0 {
            continue;
        }
        let mid = s.at(0.5 * (w[0] + w[1]));
        if point_location(poly, mid, tol) == Location::Outside {
            out += (w[1] - w[0]) * len;
        }
    }
    out
}

/// Whether some interior point of `s` lies outside the closed polygon.
pub fn segment_exits(poly: &Polygon, s: &Segment, tol: f64) -> Result<bool, GeometryError> {
    for p in [s.a, s.b] {
        if poly.distance_to_point(p) > tol {
            return Err(GeometryError::EndpointOutside { x: p.x, y: p.y });
        }
    }
    Ok(uncovered_length(poly, s, tol) > tol)
}

pub fn is_concave_vertex(poly: &Polygon, i: usize) -> bool {
    poly.is_concave_vertex(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn areas() {
        assert_eq!(fixtures::unit_square().area(), 1.0);
        assert_eq!(fixtures::l_shape().area(), 3.0);
        let tri = Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]).unwrap();
        assert_eq!(tri.area(), 0.5);
        assert_eq!(polygon_area(&[p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)]).unwrap(), 0.5);
        assert!(polygon_area(&[p(0.0, 0.0), p(1.0, 0.0)]).is_err());
        assert!(polygon_area(&[p(0.0, 0.0), p(0.0, 1.0), p(1.0, 0.0)]).is_err());
    }

    #[test]
    fn l_shape_locations() {
        let l = fixtures::l_shape();
        assert_eq!(point_location(&l, p(0.5, 0.5), 1e-9), Location::Inside);
        assert_eq!(point_location(&l, p(1.5, 1.5), 1e-9), Location::Outside);
        assert_eq!(point_location(&l, p(1.0, 1.5), 1e-9), Location::Boundary);
    }

    #[test]
    fn l_shape_exits() {
        let l = fixtures::l_shape();
        let t = 1e-9;
        assert!(segment_exits(&l, &Segment::new(p(0.5, 1.8), p(1.8, 0.5)), t).unwrap());
        assert!(!segment_exits(&l, &Segment::new(p(0.2, 0.2), p(0.8, 0.2)), t).unwrap());
        assert!(!segment_exits(&l, &Segment::new(p(0.0, 0.0), p(2.0, 0.0)), t).unwrap());
        assert!(!segment_exits(&l, &Segment::new(p(1.0, 1.0), p(1.0, 2.0)), t).unwrap());
        assert!(matches!(
            segment_exits(&l, &Segment::new(p(0.5, 0.5), p(1.5, 1.5)), t),
            Err(GeometryError::EndpointOutside { .. })
        ));
    }

    #[test]
    fn concave_vertices() {
        let l = fixtures::l_shape();
        assert!(l.is_concave_vertex(3));
        assert!(!l.is_concave_vertex(0));
        assert_eq!(l.concave_vertices(), vec![3]);
        let sq = fixtures::unit_square();
        assert!((0..4).all(|i| !sq.is_concave_vertex(i)));
    }

    #[test]
    fn clockwise_is_reversed() {
        let cw = Polygon::from_coords(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]).unwrap();
        assert_eq!(cw.area(), 1.0);
        assert!(shoelace(cw.vertices()) > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let bowtie = Polygon::from_coords(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(matches!(bowtie, Err(GeometryError::NonSimple(_))));
        let spec = PolygonSpec {
            vertices: fixtures::unit_square().vertices().to_vec(),
            holes: vec![vec![p(0.2, 0.2), p(0.4, 0.2), p(0.3, 0.4)]],
        };
        assert!(matches!(Polygon::try_from(spec), Err(GeometryError::HolesUnsupported)));
        assert!(matches!(
            Polygon::from_coords(&[(0.0, 0.0), (f64::NAN, 0.0), (0.0, 1.0)]),
            Err(GeometryError::NonFinite)
        ));
    }

    #[test]
    fn json_round_trip() {
        let l = fixtures::l_shape();
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(s, r#"{"vertices":[[0.0,0.0],[2.0,0.0],[2.0,1.0],[1.0,1.0],[1.0,2.0],[0.0,2.0]],"holes":[]}"#);
        let back: Polygon = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn intersect_with_convex() {
        let l = fixtures::l_shape();
        let c = ConvexPolygon::rectangle(p(0.5, 0.5), p(1.5, 1.5));
        let (a, _) = l.intersect_convex_moments(&c);
        assert!((a - 0.75).abs() < 1e-12);
    }
}
