//! Per-level summaries shared by the commands and the verification suite.

use serde::{Deserialize, Serialize};

use polyot::geometry::Point2;
use polyot::otsolve::SemiDiscreteSolution;
use polyot::partial::{
    classify_fb_points, fb_cardinality_bounds, fb_normal_check, free_to_free_pairs, graph_over_l_check,
    interior_ball_check, resample_polyline, uniform_convexity_probe, PartialSolution,
};
use polyot::singular::SingularReport;

/// Digest of one singular-set analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularLevel {
    pub n: usize,
    pub edges: usize,
    pub nodes: usize,
    pub chains: usize,
    /// Every singular edge lies on exactly one chain.
    pub chains_partition_edges: bool,
    pub sigma1_clusters: usize,
    pub sigma2pp_clusters: usize,
    pub sigma1_bound: usize,
    pub sigma2pp_bound: usize,
    pub normal_error_max: f64,
    pub obliqueness_min: Option<f64>,
    /// Edges whose dual endpoints are not both near the target boundary.
    pub obliqueness_unmeasured: usize,
    pub max_turning_angle: f64,
    pub growth_exponent: Option<f64>,
    pub densities: Vec<f64>,
    pub probe_error: Option<String>,
}

pub fn singular_level(sol: &SemiDiscreteSolution, r: &SingularReport) -> SingularLevel {
    let g = &r.graph;
    let mut seen = vec![0usize; g.edges.len()];
    for c in &g.chains {
        for &e in &c.edges {
            seen[e] += 1;
        }
    }
    SingularLevel {
        n: sol.problem.sites.len(),
        edges: g.edges.len(),
        nodes: g.nodes.len(),
        chains: g.chains.len(),
        chains_partition_edges: seen.iter().all(|&k| k == 1),
        sigma1_clusters: r.sigma1_clusters.len(),
        sigma2pp_clusters: r.sigma2pp_clusters.len(),
        sigma1_bound: r.sigma1_max,
        sigma2pp_bound: r.sigma2pp_max,
        normal_error_max: r.normal_error_max,
        obliqueness_min: r.obliqueness_min,
        obliqueness_unmeasured: r.obliqueness.iter().filter(|o| o.is_none()).count(),
        max_turning_angle: r.max_turning_angle,
        growth_exponent: r.probe.as_ref().map(|p| p.growth.exponent),
        densities: r.probe.as_ref().map(|p| p.densities.clone()).unwrap_or_default(),
        probe_error: r.probe_error.clone(),
    }
}

/// Digest of one partial solve and its free-boundary checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialLevel {
    pub n: usize,
    pub mass: f64,
    pub spacing: f64,
    pub source_samples: usize,
    pub target_samples: usize,
    pub certified: bool,
    pub stay_put_residual: f64,
    pub polylines: usize,
    /// Largest number of free-boundary crossings of a line parallel to the separating line's normal.
    pub multiplicity: Option<usize>,
    /// Largest slope over the separating direction after resampling at twice the spacing.
    pub lipschitz: Option<f64>,
    pub interior_ball_violations: usize,
    pub fb_normal_error: Option<f64>,
    pub f1_clusters: usize,
    pub f2_clusters: usize,
    pub f1_bound: usize,
    pub f2_bound: usize,
    pub untouched: usize,
    pub free_to_free_pairs: usize,
    pub convexity_slope: Option<f64>,
}

pub fn partial_level(n: usize, sol: &PartialSolution) -> PartialLevel {
    let h = sol.spacing();
    let tol = 2.0 * h;
    let (f1_bound, f2_bound) = fb_cardinality_bounds(sol.problem.target.len());
    let fb = sol.free_boundary.as_ref();
    let (multiplicity, lipschitz) = match fb {
        Some(fb) => {
            let (m, _) = graph_over_l_check(&fb.polylines);
            let coarse: Vec<Vec<Point2>> = fb.polylines.iter().map(|l| resample_polyline(l, tol)).collect();
            (Some(m), Some(graph_over_l_check(&coarse).1))
        }
        None => (None, None),
    };
    let classes = classify_fb_points(sol, tol);
    let active: Vec<Point2> = sol.active_target.iter().map(|&j| sol.plan.target_samples[j]).collect();
    let convexity_slope = (!active.is_empty())
        .then(|| {
            let c = active.iter().fold(Point2::ZERO, |a, &p| a + p) / active.len() as f64;
            uniform_convexity_probe(sol, c, 0.25 * sol.problem.target.diameter()).ok()
        })
        .flatten();
    PartialLevel {
        n,
        mass: sol.problem.mass,
        spacing: h,
        source_samples: sol.plan.source_samples.len(),
        target_samples: sol.plan.target_samples.len(),
        certified: sol.certified,
        stay_put_residual: sol.stay_put_residual,
        polylines: fb.map_or(0, |f| f.polylines.len()),
        multiplicity,
        lipschitz,
        interior_ball_violations: interior_ball_check(sol, tol),
        fb_normal_error: fb.map(|_| fb_normal_check(sol)),
        f1_clusters: classes.f1_clusters,
        f2_clusters: classes.f2_clusters,
        f1_bound,
        f2_bound,
        untouched: classes.untouched,
        free_to_free_pairs: free_to_free_pairs(sol, tol),
        convexity_slope,
    }
}
