use serde::{Deserialize, Serialize};

use super::point::{Point2, Segment};

/// `{p : p . normal <= offset}` with a unit normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub normal: Point2,
    pub offset: f64,
}

impl HalfPlane {
    /// Builds `{p : p . a <= b}`, rescaling so the normal has unit length.
    /// Returns `None` when `a` is the zero vector.
    pub fn new(a: Point2, b: f64) -> Option<Self> {
        let n = a.norm();
        if n == 0.0 || !n.is_finite() || !b.is_finite() {
            return None;
        }
        Some(HalfPlane {
            normal: a / n,
            offset: b / n,
        })
    }

    pub fn signed_distance(&self, p: Point2) -> f64 {
        p.dot(self.normal) - self.offset
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.signed_distance(p) <= 0.0
    }

    /// The closure of the complement.
    pub fn flipped(&self) -> HalfPlane {
        HalfPlane {
            normal: -self.normal,
            offset: -self.offset,
        }
    }
}

/// A bounded convex set given by its CCW vertex list.
///
/// Degenerate sets are allowed: no vertices (empty), one (a point) or two
/// (a segment).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    pub fn empty() -> Self {
        ConvexPolygon::default()
    }

    /// Wraps a vertex list that is already convex and CCW.
    pub fn from_ccw_unchecked(vertices: Vec<Point2>) -> Self {
        ConvexPolygon { vertices }
    }

    pub fn point(p: Point2) -> Self {
        ConvexPolygon { vertices: vec![p] }
    }

    pub fn rectangle(lo: Point2, hi: Point2) -> Self {
        ConvexPolygon {
            vertices: vec![lo, Point2::new(hi.x, lo.y), hi, Point2::new(lo.x, hi.y)],
        }
    }

    /// Convex hull (Andrew's monotone chain). Collinear points are dropped,
    /// so the result of collinear input is a segment.
    pub fn hull(points: &[Point2]) -> Self {
        let mut pts: Vec<Point2> = points.iter().copied().filter(|p| p.is_finite()).collect();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup();
        if pts.len() <= 2 {
            return ConvexPolygon { vertices: pts };
        }
        let mut lower: Vec<Point2> = Vec::with_capacity(pts.len());
        for &p in &pts {
            while lower.len() >= 2
                && (lower[lower.len() - 1] - lower[lower.len() - 2]).cross(p - lower[lower.len() - 2]) <= 0.0
            {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Point2> = Vec::with_capacity(pts.len());
        for &p in pts.iter().rev() {
            while upper.len() >= 2
                && (upper[upper.len() - 1] - upper[upper.len() - 2]).cross(p - upper[upper.len() - 2]) <= 0.0
            {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        ConvexPolygon { vertices: lower }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point2> {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        (0..if n >= 2 { n } else { 0 })
            .map(move |i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.vertices).max(0.0)
    }

    /// Area centroid; falls back to the vertex mean for degenerate sets.
    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len();
        if n == 0 {
            return Point2::new(f64::NAN, f64::NAN);
        }
        let origin = self.vertices[0];
        let mut a = 0.0;
        let mut c = Point2::ZERO;
        for i in 1..n.saturating_sub(1) {
            let p = self.vertices[i] - origin;
            let q = self.vertices[i + 1] - origin;
            let w = p.cross(q);
            a += w;
            c += (p + q) * w;
        }
        if a.abs() <= 1e-300 {
            let mut s = Point2::ZERO;
            for &v in &self.vertices {
                s += v;
            }
            return s / n as f64;
        }
        origin + c / (3.0 * a)
    }

    /// First and second area moments about the centroid: `(area, centroid, [sxx, sxy, syy])`.
    pub fn moments(&self) -> (f64, Point2, [f64; 3]) {
        let c = self.centroid();
        let n = self.vertices.len();
        let mut a = 0.0;
        let (mut ixx, mut ixy, mut iyy) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let p = self.vertices[i] - c;
            let q = self.vertices[(i + 1) % n] - c;
            let w = p.cross(q);
            a += w;
            ixx += w * (p.x * p.x + p.x * q.x + q.x * q.x);
            iyy += w * (p.y * p.y + p.y * q.y + q.y * q.y);
            ixy += w * (2.0 * p.x * p.y + p.x * q.y + q.x * p.y + 2.0 * q.x * q.y);
        }
        (a / 2.0, c, [ixx / 12.0, ixy / 24.0, iyy / 12.0])
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, &p) in self.vertices.iter().enumerate() {
            for &q in &self.vertices[i + 1..] {
                d = d.max(p.dist(q));
            }
        }
        d
    }

    /// Closed containment up to a distance tolerance.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => self.vertices[0].dist(p) <= tol,
            2 => Segment::new(self.vertices[0], self.vertices[1]).distance_to_point(p) <= tol,
            n => (0..n).all(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let e = b - a;
                let l = e.norm();
                l == 0.0 || e.cross(p - a) / l >= -tol
            }),
        }
    }

    pub fn distance_to_point(&self, p: Point2) -> f64 {
        if self.vertices.is_empty() {
            return f64::INFINITY;
        }
        if self.vertices.len() >= 3 && self.contains(p, 0.0) {
            return 0.0;
        }
        if self.vertices.len() == 1 {
            return self.vertices[0].dist(p);
        }
        self.edges().map(|e| e.distance_to_point(p)).fold(f64::INFINITY, f64::min)
    }

    pub fn distance_to_segment(&self, s: &Segment) -> f64 {
        match self.vertices.len() {
            0 => f64::INFINITY,
            1 => s.distance_to_point(self.vertices[0]),
            _ => {
                if self.vertices.len() >= 3 && (self.contains(s.a, 0.0) || self.contains(s.b, 0.0)) {
                    return 0.0;
                }
                self.edges().map(|e| e.distance_to_segment(s)).fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Portion of `s` inside the closed polygon (Cyrus-Beck).
    pub fn clip_segment(&self, s: &Segment) -> Option<Segment> {
        let n = self.vertices.len();
        if n < 3 {
            return None;
        }
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        let d = s.b - s.a;
        for i in 0..n {
            let a = self.vertices[i];
            let e = self.vertices[(i + 1) % n] - a;
            // inside: e x (p - a) >= 0
            let num = e.cross(s.a - a);
            let den = e.cross(d);
            if den == 0.0 {
                if num < 0.0 {
                    return None;
                }
                continue;
            }
            let t = -num / den;
            if den > 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 > t1 {
                return None;
            }
        }
        Some(Segment::new(s.at(t0), s.at(t1)))
    }

    pub fn clip(&self, h: &HalfPlane) -> ConvexPolygon {
        clip_convex(self, h)
    }

    pub fn bbox(&self) -> Option<(Point2, Point2)> {
        bbox(&self.vertices)
    }
}

pub(crate) fn bbox(points: &[Point2]) -> Option<(Point2, Point2)> {
    let first = *points.first()?;
    let mut lo = first;
    let mut hi = first;
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    Some((lo, hi))
}

/// Signed shoelace area, positive for CCW vertex order.
pub fn shoelace(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let o = vertices[0];
    let mut a = 0.0;
    for i in 1..n - 1 {
        a += (vertices[i] - o).cross(vertices[i + 1] - o);
    }
    a / 2.0
}

/// Edge provenance carried through clipping: which constraint produced the
/// edge leaving each vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeLabel {
    /// Edge lies on the boundary of the clipping domain (domain edge index).
    Boundary(u32),
    /// Edge lies on the bisector with another piece (piece index).
    Piece(u32),
}

/// A convex polygon whose edge `i` (from vertex `i` to `i + 1`) carries `labels[i]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledPolygon {
    pub points: Vec<Point2>,
    pub labels: Vec<EdgeLabel>,
}

impl LabeledPolygon {
    pub fn from_convex(poly: &ConvexPolygon) -> Self {
        let n = poly.len();
        LabeledPolygon {
            points: poly.vertices().to_vec(),
            labels: (0..n as u32).map(EdgeLabel::Boundary).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.points).max(0.0)
    }

    pub fn to_convex(&self) -> ConvexPolygon {
        ConvexPolygon::from_ccw_unchecked(self.points.clone())
    }

    /// Clips against `{p : p . a <= b}`, labelling the new edge with `label`.
    pub fn clip(&mut self, a: Point2, b: f64, label: EdgeLabel) {
        let n = self.points.len();
        if n == 0 {
            return;
        }
        let d: Vec<f64> = self.points.iter().map(|p| p.dot(a) - b).collect();
        if d.iter().all(|&x| x <= 0.0) {
            return;
        }
        if d.iter().all(|&x| x > 0.0) {
            self.points.clear();
            self.labels.clear();
            return;
        }
        let mut pts = Vec::with_capacity(n + 1);
        let mut labs = Vec::with_capacity(n + 1);
        for i in 0..n {
            let j = (i + 1) % n;
            let (p, q) = (self.points[i], self.points[j]);
            let (dp, dq) = (d[i], d[j]);
            if dp <= 0.0 {
                if dq <= 0.0 {
                    pts.push(p);
                    labs.push(self.labels[i]);
                } else if dp < 0.0 {
                    pts.push(p);
                    labs.push(self.labels[i]);
                    pts.push(p.lerp(q, dp / (dp - dq)));
                    labs.push(label);
                } else {
                    pts.push(p);
                    labs.push(label);
                }
            } else if dq < 0.0 {
                pts.push(p.lerp(q, dp / (dp - dq)));
                labs.push(self.labels[i]);
            }
        }
        dedup_closed(&mut pts, &mut labs);
        self.points = pts;
        self.labels = labs;
    }
}

fn dedup_closed(pts: &mut Vec<Point2>, labs: &mut Vec<EdgeLabel>) {
    if pts.len() < 2 {
        return;
    }
    let scale = pts.iter().fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs())).max(1.0);
    let eps = 1e-14 * scale;
    let mut i = 0;
    while pts.len() >= 2 && i < pts.len() {
        let j = (i + 1) % pts.len();
        if pts[i].dist(pts[j]) <= eps {
            // drop the first of the pair; its zero-length edge disappears
            pts.remove(i);
            labs.remove(i);
            if i > 0 {
                i -= 1;
            }
        } else {
            i += 1;
        }
    }
}

/// Intersection of a convex polygon with a half-plane. Empty, point and
/// segment results are returned as degenerate polygons.
pub fn clip_convex(cell: &ConvexPolygon, h: &HalfPlane) -> ConvexPolygon {
    let mut lp = LabeledPolygon::from_convex(cell);
    lp.clip(h.normal, h.offset, EdgeLabel::Boundary(u32::MAX));
    ConvexPolygon::from_ccw_unchecked(lp.points)
}

/// Intersection of two convex polygons (the second must be non-degenerate).
pub fn intersect_convex(a: &ConvexPolygon, b: &ConvexPolygon) -> ConvexPolygon {
    let mut lp = LabeledPolygon::from_convex(a);
    let n = b.len();
    for i in 0..n {
        let p = b.vertices()[i];
        let q = b.vertices()[(i + 1) % n];
        let e = q - p;
        // inside of CCW edge: e x (x - p) >= 0  <=>  x . (e.y, -e.x) <= p . (e.y, -e.x)
        let nrm = Point2::new(e.y, -e.x);
        lp.clip(nrm, p.dot(nrm), EdgeLabel::Boundary(i as u32));
        if lp.is_empty() {
            break;
        }
    }
    ConvexPolygon::from_ccw_unchecked(lp.points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::rectangle(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0))
    }

    #[test]
    fn clip_half() {
        let h = HalfPlane::new(Point2::new(1.0, 0.0), 0.5).unwrap();
        let c = clip_convex(&unit_square(), &h);
        assert!((c.area() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clip_identity_and_empty() {
        let sq = unit_square();
        let keep = clip_convex(&sq, &HalfPlane::new(Point2::new(1.0, 0.0), 2.0).unwrap());
        assert_eq!(keep, sq);
        let gone = clip_convex(&sq, &HalfPlane::new(Point2::new(1.0, 0.0), -1.0).unwrap());
        assert!(gone.is_empty());
    }

    #[test]
    fn clip_to_segment_is_degenerate() {
        let c = clip_convex(&unit_square(), &HalfPlane::new(Point2::new(1.0, 0.0), 0.0).unwrap());
        assert_eq!(c.len(), 2);
        assert_eq!(c.area(), 0.0);
    }

    #[test]
    fn hull_of_collinear_is_segment() {
        let h = ConvexPolygon::hull(&[
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.5, 0.5),
        ]);
        assert_eq!(h.len(), 2);
    }

    #[test]
    fn moments_of_square() {
        let (a, c, m) = unit_square().moments();
        assert!((a - 1.0).abs() < 1e-15);
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
        assert!((m[0] - 1.0 / 12.0).abs() < 1e-15);
        assert!(m[1].abs() < 1e-15);
        assert!((m[2] - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn labels_track_new_edges() {
        let mut lp = LabeledPolygon::from_convex(&unit_square());
        lp.clip(Point2::new(1.0, 0.0), 0.5, EdgeLabel::Piece(7));
        assert_eq!(lp.points.len(), 4);
        let piece_edges: Vec<_> = (0..4).filter(|&i| lp.labels[i] == EdgeLabel::Piece(7)).collect();
        assert_eq!(piece_edges.len(), 1);
        let i = piece_edges[0];
        let (p, q) = (lp.points[i], lp.points[(i + 1) % 4]);
        assert!((p.x - 0.5).abs() < 1e-15 && (q.x - 0.5).abs() < 1e-15);
    }

    #[test]
    fn segment_clip() {
        let s = Segment::new(Point2::new(-1.0, 0.5), Point2::new(2.0, 0.5));
        let c = unit_square().clip_segment(&s).unwrap();
        assert!((c.length() - 1.0).abs() < 1e-15);
    }
}
