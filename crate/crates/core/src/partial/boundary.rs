use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{GridSamples, PartialError, PartialSolution, ACTIVE_THRESHOLD};
use crate::geometry::{Point2, Segment};

/// Interface curves between active and inactive samples: in the source
/// (`polylines`) and in the target (`target_polylines`, unclassified).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundary {
    pub polylines: Vec<Vec<Point2>>,
    pub target_polylines: Vec<Vec<Point2>>,
}

impl FreeBoundary {
    pub fn segments(&self) -> Vec<Segment> {
        polyline_segments(&self.polylines)
    }

    pub fn vertex_count(&self) -> usize {
        self.polylines.iter().map(|p| p.len()).sum()
    }

    pub fn distance_to(&self, p: Point2) -> f64 {
        distance_to_polylines(&self.polylines, p)
    }

    pub fn target_distance_to(&self, p: Point2) -> f64 {
        distance_to_polylines(&self.target_polylines, p)
    }
}

pub(crate) fn polyline_segments(lines: &[Vec<Point2>]) -> Vec<Segment> {
    lines
        .iter()
        .flat_map(|l| l.windows(2).map(|w| Segment::new(w[0], w[1])))
        .collect()
}

pub(crate) fn distance_to_polylines(lines: &[Vec<Point2>], p: Point2) -> f64 {
    let mut d = f64::INFINITY;
    for l in lines {
        if l.len() == 1 {
            d = d.min(l[0].dist(p));
        }
        for w in l.windows(2) {
            d = d.min(Segment::new(w[0], w[1]).distance_to_point(p));
        }
    }
    d
}

/// Triangles of the sample lattice: each lattice square with all four
/// corners present is split along its main diagonal; squares with three
/// corners give one triangle.
fn lattice_triangles(grid: &GridSamples) -> Vec<[usize; 3]> {
    let index: HashMap<(i64, i64), usize> = grid.lattice.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let squares: BTreeSet<(i64, i64)> = grid
        .lattice
        .iter()
        .flat_map(|&(i, j)| [(i, j), (i - 1, j), (i, j - 1), (i - 1, j - 1)])
        .collect();
    let mut tris = Vec::new();
    for (i, j) in squares {
        let a = index.get(&(i, j)).copied();
        let b = index.get(&(i + 1, j)).copied();
        let c = index.get(&(i + 1, j + 1)).copied();
        let d = index.get(&(i, j + 1)).copied();
        match (a, b, c, d) {
            (Some(a), Some(b), Some(c), Some(d)) => {
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            }
            (None, Some(b), Some(c), Some(d)) => tris.push([b, c, d]),
            (Some(a), None, Some(c), Some(d)) => tris.push([a, c, d]),
            (Some(a), Some(b), None, Some(d)) => tris.push([a, b, d]),
            (Some(a), Some(b), Some(c), None) => tris.push([a, b, c]),
            _ => {}
        }
    }
    tris
}

/// Contour `values = level` of the piecewise-linear interpolant over the
/// lattice triangulation, stitched into polylines. Values at or above the
/// level count as inside.
pub fn extract_level_set(grid: &GridSamples, values: &[f64], level: f64) -> Vec<Vec<Point2>> {
    let inside = |k: usize| values[k] >= level;
    let crossing = |a: usize, b: usize| {
        let (fa, fb) = (values[a] - level, values[b] - level);
        let t = (fa / (fa - fb)).clamp(0.0, 1.0);
        grid.points[a].lerp(grid.points[b], t)
    };
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    // edge key -> the contour segments through it
    let mut nodes: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut segs: Vec<[(usize, usize); 2]> = Vec::new();
    for t in lattice_triangles(grid) {
        let mut cut = Vec::with_capacity(2);
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            if inside(a) != inside(b) {
                cut.push(key(a, b));
            }
        }
        if cut.len() == 2 {
            let s = segs.len();
            segs.push([cut[0], cut[1]]);
            nodes.entry(cut[0]).or_default().push(s);
            nodes.entry(cut[1]).or_default().push(s);
        }
    }
    let mut used = vec![false; segs.len()];
    let mut lines = Vec::new();
    let walk = |start: (usize, usize), used: &mut Vec<bool>| -> Vec<Point2> {
        let mut line = vec![crossing(start.0, start.1)];
        let mut at = start;
        while let Some(&s) = nodes[&at].iter().find(|&&s| !used[s]) {
            used[s] = true;
            at = if segs[s][0] == at { segs[s][1] } else { segs[s][0] };
            line.push(crossing(at.0, at.1));
        }
        line
    };
    let ends: Vec<(usize, usize)> = nodes.iter().filter(|(_, v)| v.len() == 1).map(|(&k, _)| k).collect();
    for e in ends {
        if nodes[&e].iter().any(|&s| !used[s]) {
            lines.push(walk(e, &mut used));
        }
    }
    let keys: Vec<(usize, usize)> = nodes.keys().copied().collect();
    for k in keys {
        if nodes[&k].iter().any(|&s| !used[s]) {
            lines.push(walk(k, &mut used));
        }
    }
    lines
}

/// Interface between active and inactive samples at the activity threshold.
/// `h` is the sampling spacing; polylines shorter than `h` are dropped.
pub fn extract_free_boundary(sol: &PartialSolution, h: f64) -> Result<FreeBoundary, PartialError> {
    let keep = |lines: Vec<Vec<Point2>>| -> Vec<Vec<Point2>> {
        lines
            .into_iter()
            .filter(|l| l.windows(2).map(|w| w[0].dist(w[1])).sum::<f64>() >= h)
            .collect()
    };
    let polylines = keep(extract_level_set(&sol.source_grid, &sol.source_fraction, ACTIVE_THRESHOLD));
    if polylines.is_empty() {
        return Err(PartialError::EmptyBoundary);
    }
    let target_polylines = keep(extract_level_set(&sol.target_grid, &sol.target_fraction, ACTIVE_THRESHOLD));
    Ok(FreeBoundary {
        polylines,
        target_polylines,
    })
}

/// Points at arclength multiples of `spacing` along `line`, plus its last vertex.
pub fn resample_polyline(line: &[Point2], spacing: f64) -> Vec<Point2> {
    let Some(&first) = line.first() else {
        return Vec::new();
    };
    let mut out = vec![first];
    let mut carry = 0.0;
    for w in line.windows(2) {
        let len = w[0].dist(w[1]);
        let mut s = spacing - carry;
        while s < len - 1e-9 * spacing {
            out.push(w[0].lerp(w[1], s / len));
            s += spacing;
        }
        carry = len - (s - spacing);
    }
    let last = line[line.len() - 1];
    if out.last() != Some(&last) {
        out.push(last);
    }
    out
}

/// Sweeps the lines `x2 = c` between consecutive distinct vertex heights and
/// returns the largest number of crossings together with the largest
/// `|dx1 / dx2|` between consecutive vertices.
pub fn graph_over_l_check(polylines: &[Vec<Point2>]) -> (usize, f64) {
    let segs = polyline_segments(polylines);
    let mut ys: Vec<f64> = polylines.iter().flatten().map(|p| p.y).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    let mut mult = usize::from(!segs.is_empty() && ys.len() == 1);
    for w in ys.windows(2) {
        let c = 0.5 * (w[0] + w[1]);
        let k = segs.iter().filter(|s| (s.a.y - c) * (s.b.y - c) < 0.0).count();
        mult = mult.max(k);
    }
    let mut lip: f64 = 0.0;
    for s in &segs {
        let (dx, dy) = ((s.b.x - s.a.x).abs(), (s.b.y - s.a.y).abs());
        if dx > 0.0 {
            lip = lip.max(if dy > 0.0 { dx / dy } else { f64::INFINITY });
        }
    }
    (mult, lip)
}
