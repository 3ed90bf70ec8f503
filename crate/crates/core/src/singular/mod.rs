//! Singular set of a semi-discrete Brenier potential: Laguerre edges whose
//! dual segment leaves the target, chained into curves and classified by the
//! target features their subdifferentials touch.

mod classify;
mod diagnostics;
mod graph;

use serde::{Deserialize, Serialize};

use crate::geometry::{line_angle, segment_exits, Point2, Polygon, Segment};
use crate::otsolve::SemiDiscreteSolution;
use crate::potential::{PotentialError, SectionOptions};

pub use classify::{
    cardinality_bounds, check_obliqueness, classify_node, classify_nodes, cluster_nodes, cluster_points, hull_overlap,
    touched_features, verify_single_touch, PointClass, PointTag,
};
pub use diagnostics::{
    distance_to_special, fit_growth_exponent, ls_slope, max_turning_angle, median_spacing, node_turning_angle,
    section_density, smooth_nodes, tangential_width, GrowthFit,
};
pub use graph::{build_graph, chain_edges, detect_singular_edges, Chain, SingularEdge, SingularGraph, SingularNode};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SingularError {
    #[error("dual endpoint ({x}, {y}) is not near the target boundary")]
    DualEndpointNotOnBoundary { x: f64, y: f64 },
    #[error("section of height {height:e} leaves the source")]
    SectionEscapedDomain { height: f64 },
    #[error("no smooth point on the singular set to probe")]
    NoProbePoint,
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingularOptions {
    /// Cluster radius in units of the median site spacing.
    pub cluster_factor: f64,
    /// Feature-touch and boundary tolerance in units of the median site spacing.
    pub touch_factor: f64,
    /// Nodes this many edges from a branch or non-smooth node are skipped by
    /// turning-angle and probe selection.
    pub exclude_edges: usize,
    /// Section heights for the growth and density diagnostics, decreasing,
    /// in units of `diam(source)^2`.
    pub heights: Vec<f64>,
}

impl Default for SingularOptions {
    fn default() -> Self {
        SingularOptions {
            cluster_factor: 1.5,
            touch_factor: 2.0,
            exclude_edges: 3,
            heights: (0..6).map(|k| 4e-3 / 2f64.powi(k)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularDiagnostics {
    pub growth_exponent: f64,
    pub density_ratio_min: f64,
    pub obliqueness_min: f64,
    pub max_turning_angle: f64,
}

/// Growth and density measurements at one probe point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionProbe {
    pub edge: usize,
    pub point: Point2,
    pub tangent: Point2,
    pub growth: GrowthFit,
    pub densities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularReport {
    pub spacing: f64,
    pub graph: SingularGraph,
    pub classes: Vec<PointClass>,
    pub sigma1_clusters: Vec<Vec<usize>>,
    pub sigma2pp_clusters: Vec<Vec<usize>>,
    /// Connected pieces of the graph no wider than the cluster radius.
    pub isolated_candidates: Vec<Vec<usize>>,
    pub sigma1_max: usize,
    pub sigma2pp_max: usize,
    /// Largest deviation from a right angle between an edge and its dual (radians).
    pub normal_error_max: f64,
    /// Per edge `(d1, d2)`, or `None` where a dual endpoint is far from the boundary.
    pub obliqueness: Vec<Option<(f64, f64)>>,
    pub obliqueness_min: Option<f64>,
    pub single_touch_rate: f64,
    pub max_turning_angle: f64,
    pub probe: Option<SectionProbe>,
    /// Why the probe failed, if it did.
    pub probe_error: Option<String>,
}

impl SingularReport {
    pub fn diagnostics(&self) -> Option<SingularDiagnostics> {
        let probe = self.probe.as_ref()?;
        Some(SingularDiagnostics {
            growth_exponent: probe.growth.exponent,
            density_ratio_min: probe.densities.iter().copied().fold(f64::INFINITY, f64::min),
            obliqueness_min: self.obliqueness_min.unwrap_or(f64::NAN),
            max_turning_angle: self.max_turning_angle,
        })
    }
}

/// Angle between an edge direction and the line perpendicular to its dual.
pub fn normal_error(e: &SingularEdge) -> f64 {
    (std::f64::consts::FRAC_PI_2 - line_angle(e.edge.direction(), e.dual.direction())).abs()
}

/// Connected components of the singular graph whose nodes fit in a disc of diameter `radius`.
fn isolated_components(graph: &SingularGraph, radius: f64) -> Vec<Vec<usize>> {
    let n = graph.nodes.len();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut i = 0;
        while i < members.len() {
            let v = members[i];
            for &e in &graph.nodes[v].edges {
                let (a, b) = graph.edge_nodes[e];
                for w in [a, b] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                    }
                }
            }
            i += 1;
        }
        members.sort_unstable();
        out.push(members);
    }
    out.into_iter()
        .filter(|m| {
            m.iter()
                .all(|&a| m.iter().all(|&b| graph.nodes[a].position.dist(graph.nodes[b].position) <= radius))
        })
        .collect()
}

/// Probe edge: both ends smooth, midpoint farthest from the source boundary.
fn pick_probe(graph: &SingularGraph, smooth: &[bool], source: &Polygon) -> Option<usize> {
    (0..graph.edges.len())
        .filter(|&e| {
            let (a, b) = graph.edge_nodes[e];
            smooth[a] && smooth[b]
        })
        .map(|e| (e, source.distance_to_boundary(graph.edges[e].edge.midpoint())))
        .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)))
        .map(|x| x.0)
}

fn run_probe(sol: &SemiDiscreteSolution, graph: &SingularGraph, e: usize, opts: &SingularOptions) -> Result<SectionProbe, SingularError> {
    let source = &sol.problem.source;
    let target = &sol.problem.target;
    let bounds = source.as_convex().expect("convex source");
    let se = &graph.edges[e];
    let x0 = se.edge.midpoint();
    let tangent = se.edge.direction().normalized().unwrap_or(Point2::new(1.0, 0.0));
    let d2 = source.diameter().powi(2);
    let hs: Vec<f64> = opts.heights.iter().map(|h| h * d2).collect();
    let sopts = SectionOptions::default();
    let u = &sol.potential.u;
    let growth = fit_growth_exponent(u, x0, tangent, &hs, &bounds, &sopts)?;
    let sites = &sol.problem.sites;
    let i = se.cell_pair.0;
    let tol = 1e-9 * target.diameter();
    let same_side = |k: usize| k == i || !segment_exits(target, &Segment::new(sites[i], sites[k]), tol).unwrap_or(true);
    let densities = hs
        .iter()
        .map(|&h| section_density(u, &bounds, x0, h, &sopts, same_side))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SectionProbe {
        edge: e,
        point: x0,
        tangent,
        growth,
        densities,
    })
}

/// Full singular-set analysis of a converged solution.
pub fn analyze(sol: &SemiDiscreteSolution, opts: &SingularOptions) -> SingularReport {
    let diag = sol.diagram();
    let target = &sol.problem.target;
    let spacing = median_spacing(&diag.sites);
    let edges = detect_singular_edges(diag, target, 1e-9 * target.diameter());
    let graph = build_graph(diag, edges);
    let touch = opts.touch_factor * spacing;
    let radius = opts.cluster_factor * spacing;
    let classes = classify_nodes(&graph, target, touch);
    let (sigma1_max, sigma2pp_max) = cardinality_bounds(target.len());
    let obliqueness: Vec<Option<(f64, f64)>> = graph.edges.iter().map(|e| check_obliqueness(e, target, touch).ok()).collect();
    let obliqueness_min = obliqueness
        .iter()
        .flatten()
        .map(|&(a, b)| a.min(b))
        .reduce(f64::min);
    let touched = graph.nodes.iter().filter(|n| verify_single_touch(n, target, touch)).count();
    let smooth = smooth_nodes(&graph, &classes, opts.exclude_edges);
    let (probe, probe_error) = match pick_probe(&graph, &smooth, &sol.problem.source) {
        None if graph.edges.is_empty() => (None, None),
        None => (None, Some(SingularError::NoProbePoint.to_string())),
        Some(e) => match run_probe(sol, &graph, e, opts) {
            Ok(p) => (Some(p), None),
            Err(err) => (None, Some(err.to_string())),
        },
    };
    SingularReport {
        spacing,
        sigma1_clusters: cluster_nodes(&graph, &classes, PointTag::Sigma1, radius),
        sigma2pp_clusters: cluster_nodes(&graph, &classes, PointTag::Sigma2DoublePrime, radius),
        isolated_candidates: isolated_components(&graph, radius),
        sigma1_max,
        sigma2pp_max,
        normal_error_max: graph.edges.iter().map(normal_error).fold(0.0, f64::max),
        obliqueness,
        obliqueness_min,
        single_touch_rate: if graph.nodes.is_empty() {
            1.0
        } else {
            touched as f64 / graph.nodes.len() as f64
        },
        max_turning_angle: max_turning_angle(&graph, &classes, opts.exclude_edges),
        probe,
        probe_error,
        classes,
        graph,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::otsolve::{solve, NewtonOptions, SemiDiscreteProblem};

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn two_sites_across_notch() {
        let l = fixtures::l_shape();
        let src = fixtures::square_of_area(3.0);
        let prob = SemiDiscreteProblem::new(src, vec![p(1.5, 0.9), p(0.9, 1.5)], vec![1.5, 1.5], l).unwrap();
        let sol = solve(&prob, &NewtonOptions::default()).unwrap();
        let edges = detect_singular_edges(sol.diagram(), &prob.target, 1e-9);
        assert_eq!(edges.len(), 1);
        assert_eq!(edges[0].cell_pair, (0, 1));
        assert!(normal_error(&edges[0]) < 1e-12);
    }

    #[test]
    fn convex_target_has_no_singular_edges() {
        let sq = fixtures::unit_square();
        let prob = SemiDiscreteProblem::sampled(fixtures::square(0.0, 0.0, 1.0), sq, 200, 3, 3).unwrap();
        let sol = solve(&prob, &NewtonOptions::default()).unwrap();
        let r = analyze(&sol, &SingularOptions::default());
        assert!(r.graph.edges.is_empty());
        assert!(r.probe.is_none() && r.probe_error.is_none());
    }
}
