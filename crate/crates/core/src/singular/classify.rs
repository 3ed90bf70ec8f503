//! Node classification against the target boundary, clustering, obliqueness
//! and single-touch checks.

use serde::{Deserialize, Serialize};

use super::graph::{SingularEdge, SingularGraph, SingularNode};
use super::SingularError;
use crate::geometry::{segment_crossing_param, ConvexPolygon, Point2, Polygon, Segment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PointTag {
    Sigma1,
    Sigma2Prime,
    Sigma2DoublePrime,
}

impl PointTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PointTag::Sigma1 => "Sigma1",
            PointTag::Sigma2Prime => "Sigma2Prime",
            PointTag::Sigma2DoublePrime => "Sigma2DoublePrime",
        }
    }
}

/// Class of one graph node, with the target vertices and edges its dual hull touches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointClass {
    pub node: usize,
    pub tag: PointTag,
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Upper bounds `(m, m (m - 1) (m - 2) / 6)` for an `m`-gon.
pub fn cardinality_bounds(m: usize) -> (usize, usize) {
    let pp = if m >= 3 { m * (m - 1) * (m - 2) / 6 } else { 0 };
    (m, pp)
}

/// Features of `target` within `tol` of `hull`.
pub fn touched_features(hull: &ConvexPolygon, target: &Polygon, tol: f64) -> (Vec<usize>, Vec<usize>) {
    let vs = (0..target.len())
        .filter(|&i| hull.distance_to_point(target.vertex(i)) <= tol)
        .collect();
    let es = (0..target.len())
        .filter(|&i| hull.distance_to_segment(&target.edge(i)) <= tol)
        .collect();
    (vs, es)
}

/// A touched vertex makes a node `Sigma1`; otherwise three or more touched
/// edges make it `Sigma2DoublePrime`, and anything else `Sigma2Prime`.
pub fn classify_node(node: &SingularNode, target: &Polygon, tol: f64) -> (PointTag, Vec<usize>, Vec<usize>) {
    let (vs, es) = touched_features(&node.dual_hull, target, tol);
    let tag = if !vs.is_empty() {
        PointTag::Sigma1
    } else if es.len() >= 3 {
        PointTag::Sigma2DoublePrime
    } else {
        PointTag::Sigma2Prime
    };
    (tag, vs, es)
}

pub fn classify_nodes(graph: &SingularGraph, target: &Polygon, tol: f64) -> Vec<PointClass> {
    graph
        .nodes
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let (tag, vertices, edges) = classify_node(n, target, tol);
            PointClass {
                node: k,
                tag,
                vertices,
                edges,
            }
        })
        .collect()
}

/// Single-linkage clusters of `points` at `radius`, each sorted, ordered by first member.
pub fn cluster_points(points: &[Point2], radius: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if points[i].dist(points[j]) <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Clusters of the nodes carrying `tag`, as node indices.
pub fn cluster_nodes(graph: &SingularGraph, classes: &[PointClass], tag: PointTag, radius: f64) -> Vec<Vec<usize>> {
    let ids: Vec<usize> = classes.iter().filter(|c| c.tag == tag).map(|c| c.node).collect();
    let pts: Vec<Point2> = ids.iter().map(|&k| graph.nodes[k].position).collect();
    cluster_points(&pts, radius)
        .into_iter()
        .map(|g| g.into_iter().map(|i| ids[i]).collect())
        .collect()
}

/// Inner normal of `target` seen from the dual endpoint `p`.
///
/// Among edges within `tol` of `p`, prefers the one the dual segment crosses
/// closest to `p` (`from_start` says whether `p` is the segment's start);
/// without a crossing, the nearest edge.
fn endpoint_normal(target: &Polygon, dual: &Segment, from_start: bool, tol: f64) -> Result<Point2, SingularError> {
    let p = if from_start { dual.a } else { dual.b };
    let near: Vec<(usize, f64)> = (0..target.len())
        .map(|i| (i, target.edge(i).distance_to_point(p)))
        .filter(|&(_, d)| d <= tol)
        .collect();
    if near.is_empty() {
        return Err(SingularError::DualEndpointNotOnBoundary { x: p.x, y: p.y });
    }
    let crossing = near
        .iter()
        .filter_map(|&(i, _)| segment_crossing_param(dual, &target.edge(i)).map(|t| (i, if from_start { t } else { 1.0 - t })))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let k = match crossing {
        Some((i, _)) => i,
        None => near.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0,
    };
    Ok(target.inner_normal(k))
}

/// `(d1, d2) = (-n . nu(y_i), n . nu(y_j))` with `n` the edge normal and `nu`
/// the inner normal of the target near each dual endpoint.
pub fn check_obliqueness(e: &SingularEdge, target: &Polygon, tol: f64) -> Result<(f64, f64), SingularError> {
    let n1 = endpoint_normal(target, &e.dual, true, tol)?;
    let n2 = endpoint_normal(target, &e.dual, false, tol)?;
    Ok((-e.normal.dot(n1), e.normal.dot(n2)))
}

/// Length of `hull ∩ s`.
pub fn hull_overlap(hull: &ConvexPolygon, s: &Segment) -> f64 {
    let v = hull.vertices();
    match v.len() {
        0 | 1 => 0.0,
        2 => {
            let h = Segment::new(v[0], v[1]);
            let d = s.direction();
            let l = d.norm();
            if l == 0.0 || h.length() == 0.0 {
                return 0.0;
            }
            let scale = l.max(h.length());
            let collinear = (d.cross(h.a - s.a) / l).abs() <= 1e-12 * scale && (d.cross(h.b - s.a) / l).abs() <= 1e-12 * scale;
            if !collinear {
                return 0.0;
            }
            let (ta, tb) = (s.project_param(h.a), s.project_param(h.b));
            let lo = ta.min(tb).max(0.0);
            let hi = ta.max(tb).min(1.0);
            ((hi - lo) * l).max(0.0)
        }
        _ => hull.clip_segment(s).map_or(0.0, |c| c.length()),
    }
}

/// True iff the node's dual hull meets every closed target edge in a set of diameter at most `tol`.
pub fn verify_single_touch(node: &SingularNode, target: &Polygon, tol: f64) -> bool {
    target.edges().all(|e| hull_overlap(&node.dual_hull, &e) <= tol)
}
