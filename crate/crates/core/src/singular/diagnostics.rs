//! Chain smoothness and section-based diagnostics near the singular set.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::classify::{PointClass, PointTag};
use super::graph::SingularGraph;
use super::SingularError;
use crate::geometry::{turning_angle, ConvexPolygon, Point2};
use crate::potential::{cells_in_convex, centered_section, PiecewiseAffineConvex, PotentialError, SectionOptions};

/// Median distance from each site to its nearest other site.
pub fn median_spacing(sites: &[Point2]) -> f64 {
    let n = sites.len();
    if n < 2 {
        return 0.0;
    }
    let (mut lo, mut hi) = (sites[0], sites[0]);
    for p in sites {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-300);
    let cell = span / (n as f64).sqrt().max(1.0);
    let key = |p: Point2| (((p.x - lo.x) / cell).floor() as i64, ((p.y - lo.y) / cell).floor() as i64);
    let mut grid: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, &p) in sites.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    let mut nn: Vec<f64> = sites
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let (kx, ky) = key(p);
            let mut best = f64::INFINITY;
            let mut r = 0i64;
            // ring r covers every point within distance r * cell
            while best > (r as f64 - 1.0).max(0.0) * cell {
                for dx in -r..=r {
                    for dy in -r..=r {
                        if dx.abs() != r && dy.abs() != r {
                            continue;
                        }
                        if let Some(v) = grid.get(&(kx + dx, ky + dy)) {
                            for &j in v {
                                if j != i {
                                    best = best.min(p.dist(sites[j]));
                                }
                            }
                        }
                    }
                }
                r += 1;
            }
            best
        })
        .collect();
    nn.sort_by(f64::total_cmp);
    if n % 2 == 1 {
        nn[n / 2]
    } else {
        0.5 * (nn[n / 2 - 1] + nn[n / 2])
    }
}

/// Graph distance (in edges) from each node to the nearest node that is a
/// branch (degree >= 3) or not of class `Sigma2Prime`; `usize::MAX` if none.
pub fn distance_to_special(graph: &SingularGraph, classes: &[PointClass]) -> Vec<usize> {
    let n = graph.nodes.len();
    let mut dist = vec![usize::MAX; n];
    let mut q = VecDeque::new();
    for k in 0..n {
        if graph.nodes[k].degree() >= 3 || classes[k].tag != PointTag::Sigma2Prime {
            dist[k] = 0;
            q.push_back(k);
        }
    }
    while let Some(v) = q.pop_front() {
        for &e in &graph.nodes[v].edges {
            let (a, b) = graph.edge_nodes[e];
            let w = if a == v { b } else { a };
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                q.push_back(w);
            }
        }
    }
    dist
}

/// Nodes of degree 2 and class `Sigma2Prime` more than `exclude` edges away
/// from any branch or non-`Sigma2Prime` node.
pub fn smooth_nodes(graph: &SingularGraph, classes: &[PointClass], exclude: usize) -> Vec<bool> {
    let d = distance_to_special(graph, classes);
    (0..graph.nodes.len())
        .map(|k| graph.nodes[k].degree() == 2 && d[k] > exclude)
        .collect()
}

/// Absolute turning angle between the two singular edges at a degree-2 node.
pub fn node_turning_angle(graph: &SingularGraph, node: usize) -> f64 {
    let nd = &graph.nodes[node];
    assert_eq!(nd.degree(), 2);
    let far = |e: usize| {
        let (a, b) = graph.edge_nodes[e];
        graph.nodes[if a == node { b } else { a }].position
    };
    let p = nd.position;
    let u = p - far(nd.edges[0]);
    let v = far(nd.edges[1]) - p;
    turning_angle(u, v).abs()
}

/// Largest turning angle over [`smooth_nodes`]; zero when there are none.
pub fn max_turning_angle(graph: &SingularGraph, classes: &[PointClass], exclude: usize) -> f64 {
    smooth_nodes(graph, classes, exclude)
        .iter()
        .enumerate()
        .filter(|(_, &ok)| ok)
        .map(|(k, _)| node_turning_angle(graph, k))
        .fold(0.0, f64::max)
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub exponent: f64,
    pub heights: Vec<f64>,
    pub widths: Vec<f64>,
}

fn section(
    u: &PiecewiseAffineConvex,
    x0: Point2,
    h: f64,
    bounds: &ConvexPolygon,
    opts: &SectionOptions,
) -> Result<ConvexPolygon, SingularError> {
    match centered_section(u, x0, h, bounds, opts) {
        Ok(s) => Ok(s.region),
        Err(PotentialError::SectionUnbounded) => Err(SingularError::SectionEscapedDomain { height: h }),
        Err(e) => Err(e.into()),
    }
}

/// Width of the centred section along `tangent`
pub fn tangential_width(region: &ConvexPolygon, tangent: Point2) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in region.vertices() {
        let s = v.dot(tangent);
        lo = lo.min(s);
        hi = hi.max(s);
    }
    hi - lo
}

/// Slope of log tangential section width against log height.
pub fn fit_growth_exponent(
    u: &PiecewiseAffineConvex,
    x0: Point2,
    tangent: Point2,
    h_values: &[f64],
    bounds: &ConvexPolygon,
    opts: &SectionOptions,
) -> Result<GrowthFit, SingularError> {
    assert!(h_values.len() >= 2);
    let t = tangent.normalized().expect("nonzero tangent");
    let mut widths = Vec::with_capacity(h_values.len());
    for &h in h_values {
        widths.push(tangential_width(&section(u, x0, h, bounds, opts)?, t));
    }
    let lx: Vec<f64> = h_values.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = widths.iter().map(|w| w.ln()).collect();
    Ok(GrowthFit {
        exponent: ls_slope(&lx, &ly),
        heights: h_values.to_vec(),
        widths,
    })
}

/// Fraction of the centred section's area covered by cells of pieces
/// accepted by `same_side`.
pub fn section_density(
    u: &PiecewiseAffineConvex,
    bounds: &ConvexPolygon,
    x0: Point2,
    h: f64,
    opts: &SectionOptions,
    same_side: impl Fn(usize) -> bool,
) -> Result<f64, SingularError> {
    let region = section(u, x0, h, bounds, opts)?;
    let total = region.area();
    let inside: f64 = cells_in_convex(u.index(), &region)
        .iter()
        .filter(|(k, _)| same_side(**k))
        .map(|(_, c)| c.area())
        .sum();
    Ok(inside / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn grid(r: f64, k: usize) -> Vec<Point2> {
        let mut v = Vec::new();
        for i in 0..=k {
            for j in 0..=k {
                v.push(p(-r + 2.0 * r * i as f64 / k as f64, -r + 2.0 * r * j as f64 / k as f64));
            }
        }
        v
    }

    fn ridge() -> PiecewiseAffineConvex {
        // |x1| + x2^2 / 2 as a max of planes s x1 + t x2 - t^2 / 2
        let mut gs = Vec::new();
        let mut cs = Vec::new();
        for k in 0..=200 {
            let t = -1.0 + 2.0 * k as f64 / 200.0;
            for s in [-1.0, 1.0] {
                gs.push(p(s, t));
                cs.push(-0.5 * t * t);
            }
        }
        PiecewiseAffineConvex::from_parts(&gs, &cs).unwrap()
    }

    #[test]
    fn spacing_of_a_lattice() {
        let pts = grid(1.0, 10);
        assert!((median_spacing(&pts) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn slope_of_exact_power() {
        let xs: Vec<f64> = (1..6).map(|i| (i as f64).ln()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x + 3.0).collect();
        assert!((ls_slope(&xs, &ys) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn paraboloid_growth_is_one_half() {
        let f = PiecewiseAffineConvex::from_tangents(&grid(1.0, 60), |x| (0.5 * x.norm2(), x)).unwrap();
        let bounds = ConvexPolygon::rectangle(p(-1.0, -1.0), p(1.0, 1.0));
        let hs: Vec<f64> = (0..5).map(|k| 0.08 / 2f64.powi(k)).collect();
        let fit = fit_growth_exponent(&f, p(0.1, -0.05), p(0.0, 1.0), &hs, &bounds, &SectionOptions::default()).unwrap();
        assert!((fit.exponent - 0.5).abs() < 0.03, "{fit:?}");
    }

    #[test]
    fn ridge_growth_and_density() {
        let f = ridge();
        let bounds = ConvexPolygon::rectangle(p(-1.0, -1.0), p(1.0, 1.0));
        let hs: Vec<f64> = (0..5).map(|k| 0.08 / 2f64.powi(k)).collect();
        let opts = SectionOptions::default();
        let fit = fit_growth_exponent(&f, Point2::ZERO, p(0.0, 1.0), &hs, &bounds, &opts).unwrap();
        assert!((fit.exponent - 0.5).abs() < 0.03, "{fit:?}");
        let g = f.gradients().to_vec();
        let r = section_density(&f, &bounds, Point2::ZERO, 0.05, &opts, |k| g[k].x > 0.0).unwrap();
        assert!((r - 0.5).abs() < 0.02, "{r}");
    }

    #[test]
    fn smooth_density_is_one() {
        let f = PiecewiseAffineConvex::from_tangents(&grid(1.0, 40), |x| (0.5 * x.norm2(), x)).unwrap();
        let bounds = ConvexPolygon::rectangle(p(-1.0, -1.0), p(1.0, 1.0));
        let r = section_density(&f, &bounds, p(0.2, 0.1), 0.02, &SectionOptions::default(), |_| true).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn escaping_section_is_reported() {
        let f = PiecewiseAffineConvex::from_tangents(&grid(1.0, 20), |x| (0.5 * x.norm2(), x)).unwrap();
        let bounds = ConvexPolygon::rectangle(p(-1.0, -1.0), p(1.0, 1.0));
        let hs = [2.0, 1.0];
        assert!(matches!(
            fit_growth_exponent(&f, Point2::ZERO, p(1.0, 0.0), &hs, &bounds, &SectionOptions::default()),
            Err(SingularError::SectionEscapedDomain { .. })
        ));
    }
}
