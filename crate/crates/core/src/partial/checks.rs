use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boundary::distance_to_polylines;
use super::{PartialError, PartialSolution, DiscretePlan};
use crate::geometry::{line_angle, ConvexPolygon, Point2};
use crate::singular::{cluster_points, ls_slope, touched_features};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FbTag {
    F1,
    F2,
    F3,
}

impl FbTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FbTag::F1 => "F1",
            FbTag::F2 => "F2",
            FbTag::F3 => "F3",
        }
    }
}

/// A free-boundary point with the target vertices and edges its local dual hull touches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FbClass {
    pub tag: FbTag,
    pub point: Point2,
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FbReport {
    pub classes: Vec<FbClass>,
    /// Probe points whose hull touched no target feature.
    pub untouched: usize,
    pub f1_clusters: usize,
    pub f2_clusters: usize,
    pub f1_max: usize,
    pub f2_max: usize,
}

/// `(m, m (m - 1) / 2)`.
pub fn fb_cardinality_bounds(m: usize) -> (usize, usize) {
    (m, m * m.saturating_sub(1) / 2)
}

/// For every coupling `(x, y)`, counts inactive target samples closer to `x`
/// than `|x - y| - tol` and inactive source samples closer to `y` than that.
pub fn interior_ball_violations(plan: &DiscretePlan, source_active: &[bool], target_active: &[bool], tol: f64) -> usize {
    let inactive_t: Vec<Point2> = (0..plan.target_samples.len())
        .filter(|&j| !target_active[j])
        .map(|j| plan.target_samples[j])
        .collect();
    let inactive_s: Vec<Point2> = (0..plan.source_samples.len())
        .filter(|&i| !source_active[i])
        .map(|i| plan.source_samples[i])
        .collect();
    plan.couplings
        .par_iter()
        .map(|&(i, j, _)| {
            let (x, y) = (plan.source_samples[i], plan.target_samples[j]);
            let r = x.dist(y) - tol;
            if r <= 0.0 {
                return 0;
            }
            inactive_t.iter().filter(|q| q.dist(x) < r).count() + inactive_s.iter().filter(|q| q.dist(y) < r).count()
        })
        .sum()
}

pub fn interior_ball_check(sol: &PartialSolution, tol: f64) -> usize {
    let mark = |n: usize, act: &[usize]| {
        let mut v = vec![false; n];
        for &k in act {
            v[k] = true;
        }
        v
    };
    let sa = mark(sol.plan.source_samples.len(), &sol.active_source);
    let ta = mark(sol.plan.target_samples.len(), &sol.active_target);
    interior_ball_violations(&sol.plan, &sa, &ta, tol)
}

/// Largest `|pi/2 - angle|` between the polyline tangent and `dir(x)` at each
/// vertex. The tangent is the principal axis of the vertices within half a
/// window of arclength. Vertices rejected by `keep`, without a direction, or
/// closer than half a window to a polyline end are skipped. Returns the error
/// and the number of vertices used.
pub fn fb_normal_error(
    polylines: &[Vec<Point2>],
    dir: impl Fn(Point2) -> Option<Point2>,
    window: f64,
    keep: impl Fn(Point2) -> bool,
) -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for l in polylines {
        let mut s = vec![0.0];
        for w in l.windows(2) {
            s.push(s.last().unwrap() + w[0].dist(w[1]));
        }
        let total = *s.last().unwrap();
        for (k, &x) in l.iter().enumerate() {
            if s[k] < 0.5 * window || s[k] + 0.5 * window > total || !keep(x) {
                continue;
            }
            let Some(d) = dir(x) else { continue };
            let lo = s.partition_point(|&v| v < s[k] - 0.5 * window);
            let hi = s.partition_point(|&v| v <= s[k] + 0.5 * window);
            let Some(tangent) = principal_axis(&l[lo..hi]) else {
                continue;
            };
            if d.norm() == 0.0 {
                continue;
            }
            worst = worst.max((std::f64::consts::FRAC_PI_2 - line_angle(tangent, d)).abs());
            used += 1;
        }
    }
    (worst, used)
}

fn principal_axis(pts: &[Point2]) -> Option<Point2> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let c = pts.iter().fold(Point2::ZERO, |a, &p| a + p) / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let d = *p - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    if sxx + syy == 0.0 {
        return None;
    }
    let t = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    Some(Point2::new(t.cos(), t.sin()))
}

/// Active coupled samples outside the boundary band.
fn evidence_sources(sol: &PartialSolution) -> Vec<usize> {
    let map = sol.forward_map();
    sol.active_source
        .iter()
        .copied()
        .filter(|&i| map[i].is_some() && !sol.source_in_band(i))
        .collect()
}

/// Tangent window `sqrt(h * diam(source))`; vertices closer than half a window
/// to the source boundary are skipped.
pub fn fb_normal_check(sol: &PartialSolution) -> f64 {
    let Some(fb) = &sol.free_boundary else {
        return 0.0;
    };
    let window = (sol.spacing() * sol.problem.source.diameter()).sqrt();
    let map = sol.forward_map();
    let cand = evidence_sources(sol);
    let pts = &sol.plan.source_samples;
    let dir = |x: Point2| {
        let i = *cand.iter().min_by(|&&a, &&b| pts[a].dist(x).total_cmp(&pts[b].dist(x)))?;
        Some(map[i]? - pts[i])
    };
    let keep = |x: Point2| sol.problem.source.distance_to_boundary(x) >= 0.5 * window;
    fb_normal_error(&fb.polylines, dir, window, keep).0
}

/// Points spaced `tol` along the free boundary, at least `2 tol` from the
/// source boundary, classified by the target features touched by the hull of
/// the targets coupled to nearby evidence samples.
pub fn classify_fb_points(sol: &PartialSolution, tol: f64) -> FbReport {
    let target = &sol.problem.target;
    let (f1_max, f2_max) = fb_cardinality_bounds(target.len());
    let mut report = FbReport {
        classes: Vec::new(),
        untouched: 0,
        f1_clusters: 0,
        f2_clusters: 0,
        f1_max,
        f2_max,
    };
    let Some(fb) = &sol.free_boundary else {
        return report;
    };
    let cand = evidence_sources(sol);
    let mut targets_of: Vec<Vec<usize>> = vec![Vec::new(); sol.plan.source_samples.len()];
    for &(i, j, _) in &sol.plan.couplings {
        targets_of[i].push(j);
    }
    for l in &fb.polylines {
        let mut next = 0.0;
        let mut s = 0.0;
        for (k, &x) in l.iter().enumerate() {
            if k > 0 {
                s += l[k - 1].dist(x);
            }
            if s < next {
                continue;
            }
            next = s + tol;
            if sol.problem.source.distance_to_boundary(x) < 2.0 * tol {
                continue;
            }
            let ys: Vec<Point2> = cand
                .iter()
                .filter(|&&i| sol.plan.source_samples[i].dist(x) <= tol)
                .flat_map(|&i| targets_of[i].iter().map(|&j| sol.plan.target_samples[j]))
                .collect();
            if ys.is_empty() {
                continue;
            }
            let hull = ConvexPolygon::hull(&ys);
            let (vs, es) = touched_features(&hull, target, tol);
            let tag = if !vs.is_empty() {
                FbTag::F1
            } else if es.len() >= 2 {
                FbTag::F2
            } else if es.len() == 1 {
                FbTag::F3
            } else {
                report.untouched += 1;
                continue;
            };
            report.classes.push(FbClass {
                tag,
                point: x,
                vertices: vs,
                edges: es,
            });
        }
    }
    let count = |tag: FbTag| {
        let p: Vec<Point2> = report.classes.iter().filter(|c| c.tag == tag).map(|c| c.point).collect();
        cluster_points(&p, 1.5 * tol).len()
    };
    report.f1_clusters = count(FbTag::F1);
    report.f2_clusters = count(FbTag::F2);
    report
}

/// Coupled pairs with the source sample within `tol` of the free boundary
/// and the target sample within `tol` of the target free boundary.
pub fn free_to_free_pairs(sol: &PartialSolution, tol: f64) -> usize {
    let Some(fb) = &sol.free_boundary else {
        return 0;
    };
    sol.plan
        .couplings
        .iter()
        .filter(|&&(i, j, _)| {
            distance_to_polylines(&fb.polylines, sol.plan.source_samples[i]) <= tol
                && distance_to_polylines(&fb.target_polylines, sol.plan.target_samples[j]) <= tol
        })
        .count()
}

/// Slope of the lower envelope of `log |Dv(y) - Dv(y')|` against
/// `log |y - y'|` over active target samples within `radius` of `p0`, with
/// `Dv` the barycenter of the coupled sources. The envelope takes the
/// minimum in each of eight equal bins of `log |y - y'|`.
pub fn uniform_convexity_probe(sol: &PartialSolution, p0: Point2, radius: f64) -> Result<f64, PartialError> {
    let back = sol.backward_map();
    let near: Vec<(Point2, Point2)> = sol
        .active_target
        .iter()
        .filter(|&&j| !sol.target_in_band(j) && sol.plan.target_samples[j].dist(p0) <= radius)
        .filter_map(|&j| Some((sol.plan.target_samples[j], back[j]?)))
        .collect();
    let mut pairs = Vec::new();
    for a in 0..near.len() {
        for b in a + 1..near.len() {
            let d = near[a].0.dist(near[b].0);
            let g = near[a].1.dist(near[b].1);
            if d > 0.0 && g > 0.0 {
                pairs.push((d.ln(), g.ln()));
            }
        }
    }
    if pairs.len() < 20 {
        return Err(PartialError::TooFewSamples(pairs.len()));
    }
    let lo = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pairs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    const BINS: usize = 8;
    let mut env: Vec<Option<(f64, f64)>> = vec![None; BINS];
    for &(x, y) in &pairs {
        let k = if hi > lo { (((x - lo) / (hi - lo)) * BINS as f64) as usize } else { 0 };
        let slot = &mut env[k.min(BINS - 1)];
        if slot.map_or(true, |(_, v)| y < v) {
            *slot = Some((x, y));
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = env.into_iter().flatten().unzip();
    if xs.len() < 2 {
        return Err(PartialError::TooFewSamples(pairs.len()));
    }
    Ok(ls_slope(&xs, &ys))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn normal_error_of_a_straight_interface() {
        let line: Vec<Point2> = (0..=20).map(|k| p(-1.5, k as f64 / 20.0)).collect();
        let (e, used) = fb_normal_error(&[line.clone()], |_| Some(p(3.0, 0.0)), 0.2, |_| true);
        assert!(e < 1e-12 && used > 10);
        let (e, _) = fb_normal_error(&[line], |_| Some(p(0.0, 1.0)), 0.2, |_| true);
        assert!((e - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn bounds_for_six_vertices() {
        assert_eq!(fb_cardinality_bounds(6), (6, 15));
        assert_eq!(fb_cardinality_bounds(4), (4, 6));
    }

    #[test]
    fn ball_violations_on_a_line() {
        // sources at -1, -2; targets at 1, 2, 3; one unit moves
        let plan = DiscretePlan {
            source_samples: vec![p(-1.0, 0.0), p(-2.0, 0.0)],
            source_weights: vec![1.0, 1.0],
            target_samples: vec![p(1.0, 0.0), p(2.0, 0.0), p(3.0, 0.0)],
            target_weights: vec![1.0; 3],
            couplings: vec![(0, 0, 1.0)],
        };
        assert_eq!(interior_ball_violations(&plan, &[true, false], &[true, false, false], 0.0), 0);
        let bad = DiscretePlan {
            couplings: vec![(0, 2, 1.0)],
            ..plan
        };
        // targets 0 and 1 are inside the ball of radius 4 around -1
        assert_eq!(interior_ball_violations(&bad, &[true, false], &[false, false, true], 0.0), 2);
    }
}
