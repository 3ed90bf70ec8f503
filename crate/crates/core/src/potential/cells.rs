//! Cells of the subdivision induced by a max of affine functions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::index::MaxAffineIndex;
use crate::geometry::{ConvexPolygon, EdgeLabel, LabeledPolygon, Point2, Polygon};

#[inline]
fn slack(v: f64) -> f64 {
    1e-12 * (1.0 + v.abs())
}

fn clip_against(idx: &MaxAffineIndex, k: usize, j: usize, p: &mut LabeledPolygon) {
    let (g, c) = (idx.gradients(), idx.intercepts());
    // f_j <= f_k  <=>  (g_j - g_k) . x <= c_k - c_j
    let a = g[j] - g[k];
    if a == Point2::ZERO {
        if c[j] > c[k] || (c[j] == c[k] && j < k) {
            p.points.clear();
            p.labels.clear();
        }
        return;
    }
    p.clip(a, c[k] - c[j], EdgeLabel::Piece(j as u32));
}

/// Region of `domain` where piece `k` is maximal, with edges labelled by the
/// neighbouring piece (or the domain edge).
///
/// Exact up to a relative slack of 1e-12: whenever some piece beats `k`
/// somewhere on the current polygon it does so at a vertex, and that vertex
/// is found by an argmax query.
pub fn build_cell(
    idx: &MaxAffineIndex,
    k: usize,
    domain: &LabeledPolygon,
    hints: &[usize],
) -> LabeledPolygon {
    let mut p = domain.clone();
    let mut used: BTreeSet<usize> = BTreeSet::new();
    for &j in hints {
        if j != k && used.insert(j) {
            clip_against(idx, k, j, &mut p);
            if p.is_empty() {
                return p;
            }
        }
    }
    let mut guard = 0usize;
    loop {
        let mut changed = false;
        let verts = p.points.clone();
        for v in verts {
            let vk = idx.value(k, v);
            let (j, val) = idx.argmax(v);
            if j == k || val <= vk + slack(val) {
                continue;
            }
            let pick = if !used.contains(&j) {
                Some(j)
            } else {
                idx.above(v, vk + slack(val))
                    .into_iter()
                    .find(|&i| i != k && !used.contains(&i))
            };
            if let Some(j) = pick {
                used.insert(j);
                clip_against(idx, k, j, &mut p);
                changed = true;
                if p.is_empty() {
                    return p;
                }
            }
        }
        guard += 1;
        if !changed || guard > 10_000 {
            break;
        }
    }
    p
}

/// All nonempty cells meeting a convex domain, keyed by piece index and
/// found by walking across shared edges from the cell at the centroid.
pub fn cells_in_convex(
    idx: &MaxAffineIndex,
    domain: &ConvexPolygon,
) -> BTreeMap<usize, LabeledPolygon> {
    let mut out = BTreeMap::new();
    if domain.len() < 3 {
        return out;
    }
    let base = LabeledPolygon::from_convex(domain);
    let step = 1e-9 * domain.diameter();
    let start = idx.argmax(domain.centroid()).0;
    let mut queue = VecDeque::from([(start, usize::MAX)]);
    let mut seen = BTreeSet::from([start]);
    while let Some((k, from)) = queue.pop_front() {
        let hints: Vec<usize> = if from == usize::MAX { vec![] } else { vec![from] };
        let cell = build_cell(idx, k, &base, &hints);
        if cell.points.len() < 3 || cell.area() <= 0.0 {
            continue;
        }
        let n = cell.points.len();
        for (e, l) in cell.labels.iter().enumerate() {
            let EdgeLabel::Piece(j) = *l else {
                continue;
            };
            let j = j as usize;
            if seen.insert(j) {
                queue.push_back((j, k));
            }
            // the label can name a piece whose cell is degenerate (its line
            // coincides with the true neighbour's), so also look across
            let (a, b) = (cell.points[e], cell.points[(e + 1) % n]);
            let Some(out) = (b - a).normalized().map(|d| Point2::new(d.y, -d.x)) else {
                continue;
            };
            let probe = a.lerp(b, 0.5) + out * step;
            if domain.contains(probe, 0.0) {
                let i = idx.argmax(probe).0;
                if seen.insert(i) {
                    queue.push_back((i, k));
                }
            }
        }
        out.insert(k, cell);
    }
    out
}

/// Cells meeting a simple polygon, one list entry per (triangle, piece).
pub fn cells_in_polygon(
    idx: &MaxAffineIndex,
    domain: &Polygon,
) -> Vec<(usize, ConvexPolygon)> {
    let mut out = Vec::new();
    for t in domain.triangles() {
        let tri = ConvexPolygon::from_ccw_unchecked(t.to_vec());
        for (k, cell) in cells_in_convex(idx, &tri) {
            out.push((k, cell.to_convex()));
        }
    }
    out
}

/// Removes points closer than `tol` to an earlier point; keeps first occurrences in order.
pub fn dedup_points(points: &[Point2], tol: f64) -> Vec<Point2> {
    let q = tol.max(1e-300);
    let key = |p: Point2| ((p.x / q).floor() as i64, (p.y / q).floor() as i64);
    let mut grid: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    let mut out: Vec<Point2> = Vec::new();
    for &p in points {
        let (kx, ky) = key(p);
        let mut dup = false;
        'scan: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                    if list.iter().any(|&i| out[i].dist(p) <= tol) {
                        dup = true;
                        break 'scan;
                    }
                }
            }
        }
        if !dup {
            grid.entry((kx, ky)).or_default().push(out.len());
            out.push(p);
        }
    }
    out
}
