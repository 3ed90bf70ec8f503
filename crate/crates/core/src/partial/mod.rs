//! Optimal partial transport between two polygons separated by a line:
//! exact discrete plans, active regions, the free boundary and checks of its
//! structure.

mod boundary;
mod checks;
mod flow;
pub(crate) mod plan;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{ConvexPolygon, Point2, Polygon};

pub use boundary::{extract_free_boundary, extract_level_set, graph_over_l_check, resample_polyline, FreeBoundary};
pub use checks::{
    classify_fb_points, fb_cardinality_bounds, fb_normal_check, fb_normal_error, free_to_free_pairs, interior_ball_check,
    interior_ball_violations, uniform_convexity_probe, FbClass, FbReport, FbTag,
};
pub use flow::{min_cost_flow, FlowResult};
pub use plan::{integer_instance, plan_cost, DiscretePlan, IntegerInstance};

/// Samples with transported fraction at least this are active.
pub const ACTIVE_THRESHOLD: f64 = 0.5;
/// Fractions strictly inside this range mark the boundary band.
pub const BAND: (f64, f64) = (0.01, 0.99);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PartialError {
    #[error("source and target cannot be separated by a line")]
    NotSeparated,
    #[error("mass {mass} is not in (0, {available}]")]
    InfeasibleMass { mass: f64, available: f64 },
    #[error("the free boundary is empty")]
    EmptyBoundary,
    #[error("only {0} sample pairs near the probe point")]
    TooFewSamples(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialProblem {
    pub source: Polygon,
    pub target: Polygon,
    pub mass: f64,
}

impl PartialProblem {
    pub fn new(source: Polygon, target: Polygon, mass: f64) -> Result<Self, PartialError> {
        let available = source.area().min(target.area());
        if !(mass > 0.0) || mass > available * (1.0 + 1e-12) {
            return Err(PartialError::InfeasibleMass { mass, available });
        }
        Ok(PartialProblem { source, target, mass })
    }

    pub fn available_mass(&self) -> f64 {
        self.source.area().min(self.target.area())
    }
}

/// `x -> R x + t` with `R` the rotation by `(cos, sin)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub cos: f64,
    pub sin: f64,
    pub t: Point2,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        cos: 1.0,
        sin: 0.0,
        t: Point2::ZERO,
    };

    pub fn rotation(angle: f64) -> RigidTransform {
        RigidTransform {
            cos: angle.cos(),
            sin: angle.sin(),
            t: Point2::ZERO,
        }
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        p.rotate(self.cos, self.sin) + self.t
    }

    pub fn inverse(&self) -> RigidTransform {
        let t = (-self.t).rotate(self.cos, -self.sin);
        RigidTransform {
            cos: self.cos,
            sin: -self.sin,
            t,
        }
    }

    pub fn apply_polygon(&self, p: &Polygon) -> Polygon {
        p.transformed(self.cos, self.sin, self.t)
    }
}

/// Moves the problem so that the separating line of widest gap becomes
/// `x1 = 0` with the source on the negative side.
pub fn check_separation(problem: &PartialProblem) -> Result<(PartialProblem, RigidTransform), PartialError> {
    let hs = problem.source.convex_hull();
    let ht = problem.target.convex_hull();
    let scale = hs.diameter().max(ht.diameter());
    let mut best: Option<(f64, Point2, f64)> = None;
    for hull in [&hs, &ht] {
        for e in hull.edges() {
            let Some(d) = e.direction().normalized() else {
                continue;
            };
            for nu in [d.perp(), -d.perp()] {
                let s_max = hs.vertices().iter().map(|v| nu.dot(*v)).fold(f64::NEG_INFINITY, f64::max);
                let t_min = ht.vertices().iter().map(|v| nu.dot(*v)).fold(f64::INFINITY, f64::min);
                let gap = t_min - s_max;
                let better = match best {
                    None => true,
                    Some((g, b, _)) => gap > g + 1e-12 * scale || (gap >= g - 1e-12 * scale && nu.x > b.x + 1e-12),
                };
                if better {
                    best = Some((gap, nu, 0.5 * (s_max + t_min)));
                }
            }
        }
    }
    let (gap, nu, c) = best.ok_or(PartialError::NotSeparated)?;
    if !(gap > 1e-12 * scale) {
        return Err(PartialError::NotSeparated);
    }
    let tr = RigidTransform {
        cos: nu.x,
        sin: -nu.y,
        t: Point2::new(-c, 0.0),
    };
    let normalized = PartialProblem {
        source: tr.apply_polygon(&problem.source),
        target: tr.apply_polygon(&problem.target),
        mass: problem.mass,
    };
    Ok((normalized, tr))
}

/// Clipped cells of a square lattice laid over a polygon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSamples {
    pub pitch: f64,
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
    pub lattice: Vec<(i64, i64)>,
}

/// Lattice of pitch `sqrt(area / n)` with a seeded offset; each sample is the
/// centroid of its cell inside the polygon, weighted by the clipped area.
pub fn grid_samples(poly: &Polygon, n: usize, rng: &mut impl Rng) -> GridSamples {
    let h = (poly.area() / n.max(1) as f64).sqrt();
    let (lo, hi) = poly.bbox();
    let origin = Point2::new(lo.x - h * rng.gen::<f64>(), lo.y - h * rng.gen::<f64>());
    let nx = ((hi.x - origin.x) / h).ceil() as i64;
    let ny = ((hi.y - origin.y) / h).ceil() as i64;
    let mut out = GridSamples {
        pitch: h,
        points: Vec::new(),
        weights: Vec::new(),
        lattice: Vec::new(),
    };
    for i in 0..nx {
        for j in 0..ny {
            let a = Point2::new(origin.x + i as f64 * h, origin.y + j as f64 * h);
            let cell = ConvexPolygon::rectangle(a, Point2::new(a.x + h, a.y + h));
            let (w, c) = poly.intersect_convex_moments(&cell);
            if w > 1e-12 * h * h {
                out.points.push(c);
                out.weights.push(w);
                out.lattice.push((i, j));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSolution {
    /// The normalized problem the plan lives on.
    pub problem: PartialProblem,
    /// Map from input coordinates to the normalized ones.
    pub transform: RigidTransform,
    pub source_grid: GridSamples,
    pub target_grid: GridSamples,
    pub plan: DiscretePlan,
    pub source_fraction: Vec<f64>,
    pub target_fraction: Vec<f64>,
    pub active_source: Vec<usize>,
    pub active_target: Vec<usize>,
    /// Dual variables for the cost `|x - y|^2`.
    pub source_dual: Vec<f64>,
    pub target_dual: Vec<f64>,
    pub certified: bool,
    pub stay_put_residual: f64,
    pub free_boundary: Option<FreeBoundary>,
    pub fb_classes: Vec<FbClass>,
}

impl PartialSolution {
    pub fn spacing(&self) -> f64 {
        self.source_grid.pitch.max(self.target_grid.pitch)
    }

    /// Barycenter of the targets receiving mass from source `i`.
    pub fn forward_map(&self) -> Vec<Option<Point2>> {
        barycenters(&self.plan, true)
    }

    /// Barycenter of the sources sending mass to target `j`.
    pub fn backward_map(&self) -> Vec<Option<Point2>> {
        barycenters(&self.plan, false)
    }

    pub fn source_in_band(&self, i: usize) -> bool {
        let f = self.source_fraction[i];
        f > BAND.0 && f < BAND.1
    }

    pub fn target_in_band(&self, j: usize) -> bool {
        let f = self.target_fraction[j];
        f > BAND.0 && f < BAND.1
    }
}

fn barycenters(plan: &DiscretePlan, forward: bool) -> Vec<Option<Point2>> {
    let n = if forward { plan.source_samples.len() } else { plan.target_samples.len() };
    let mut acc = vec![(Point2::ZERO, 0.0); n];
    for &(i, j, m) in &plan.couplings {
        let (k, p) = if forward { (i, plan.target_samples[j]) } else { (j, plan.source_samples[i]) };
        acc[k].0 += p * m;
        acc[k].1 += m;
    }
    acc.into_iter().map(|(s, m)| (m > 0.0).then(|| s / m)).collect()
}

/// Exact optimal plan between grid samples of about `n` points per domain.
pub fn solve_partial(problem: &PartialProblem, n: usize, seed: u64) -> Result<PartialSolution, PartialError> {
    let problem = PartialProblem::new(problem.source.clone(), problem.target.clone(), problem.mass)?;
    let (problem, transform) = check_separation(&problem)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sg = grid_samples(&problem.source, n, &mut rng);
    let tg = grid_samples(&problem.target, n, &mut rng);
    let inst = integer_instance(&sg.points, &sg.weights, &tg.points, &tg.weights, problem.mass);
    let res = min_cost_flow(&inst, &sg.points, &tg.points);
    let couplings = res.flow.iter().map(|&(i, j, f)| (i, j, f as f64 / inst.mass_scale)).collect();
    let plan = DiscretePlan {
        source_samples: sg.points.clone(),
        source_weights: sg.weights.clone(),
        target_samples: tg.points.clone(),
        target_weights: tg.weights.clone(),
        couplings,
    };
    let mut sent = vec![0i64; sg.points.len()];
    let mut recv = vec![0i64; tg.points.len()];
    for &(i, j, f) in &res.flow {
        sent[i] += f;
        recv[j] += f;
    }
    let frac = |u: &[i64], cap: &[i64]| -> Vec<f64> {
        u.iter().zip(cap).map(|(&a, &c)| if c > 0 { a as f64 / c as f64 } else { 0.0 }).collect()
    };
    let source_fraction = frac(&sent, &inst.supply);
    let target_fraction = frac(&recv, &inst.demand);
    let active = |f: &[f64]| (0..f.len()).filter(|&k| f[k] >= ACTIVE_THRESHOLD).collect::<Vec<_>>();
    let source_dual: Vec<f64> = res.source_pot.iter().map(|&p| -(p as f64) / inst.cost_scale).collect();
    let target_dual: Vec<f64> = res.target_pot.iter().map(|&p| p as f64 / inst.cost_scale).collect();
    let stay_put_residual = stay_put_residual(&sg.points, &source_fraction, &source_dual);
    let mut sol = PartialSolution {
        active_source: active(&source_fraction),
        active_target: active(&target_fraction),
        problem,
        transform,
        source_grid: sg,
        target_grid: tg,
        plan,
        source_fraction,
        target_fraction,
        source_dual,
        target_dual,
        certified: res.certified,
        stay_put_residual,
        free_boundary: None,
        fb_classes: Vec::new(),
    };
    if let Ok(fb) = extract_free_boundary(&sol, sol.spacing()) {
        sol.free_boundary = Some(fb);
        let tol = 2.0 * sol.spacing();
        sol.fb_classes = classify_fb_points(&sol, tol).classes;
    }
    Ok(sol)
}

/// With `u(x) = |x|^2 / 2 - phi(x) / 2` built from the source dual, the
/// largest deviation of `u - |x|^2 / 2` from its median over inactive samples.
fn stay_put_residual(points: &[Point2], fraction: &[f64], dual: &[f64]) -> f64 {
    let mut dev: Vec<f64> = (0..points.len())
        .filter(|&i| fraction[i] < ACTIVE_THRESHOLD)
        .map(|i| {
            let u = 0.5 * points[i].norm2() - 0.5 * dual[i];
            u - 0.5 * points[i].norm2()
        })
        .collect();
    if dev.is_empty() {
        return 0.0;
    }
    dev.sort_by(f64::total_cmp);
    let c = dev[dev.len() / 2];
    dev.iter().map(|d| (d - c).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::square;

    fn squares(mass: f64) -> PartialProblem {
        let s = Polygon::from_coords(&[(-2.0, 0.0), (-1.0, 0.0), (-1.0, 1.0), (-2.0, 1.0)]).unwrap();
        let t = Polygon::from_coords(&[(1.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0)]).unwrap();
        PartialProblem::new(s, t, mass).unwrap()
    }

    #[test]
    fn separated_unit_squares_need_no_transform() {
        let p = PartialProblem::new(square(-2.0, -2.0, 1.0), square(1.0, 1.0, 1.0), 0.5).unwrap();
        let (norm, tr) = check_separation(&p).unwrap();
        assert_eq!(tr, RigidTransform::IDENTITY);
        assert_eq!(norm, p);
        let (_, tr) = check_separation(&squares(0.5)).unwrap();
        assert_eq!(tr, RigidTransform::IDENTITY);
    }

    #[test]
    fn rotated_problem_is_rotated_back() {
        let rot = RigidTransform::rotation(std::f64::consts::PI / 6.0);
        let p = squares(0.5);
        let q = PartialProblem::new(rot.apply_polygon(&p.source), rot.apply_polygon(&p.target), 0.5).unwrap();
        let (norm, tr) = check_separation(&q).unwrap();
        assert!(norm.source.vertices().iter().all(|v| v.x < 0.0));
        assert!(norm.target.vertices().iter().all(|v| v.x > 0.0));
        for (a, b) in p.source.vertices().iter().zip(norm.source.vertices()) {
            assert!(a.dist(*b) < 1e-12, "{a:?} {b:?}");
        }
        let back = tr.inverse();
        for (a, b) in q.source.vertices().iter().zip(norm.source.vertices()) {
            assert!(back.apply(*b).dist(*a) < 1e-12);
        }
    }

    #[test]
    fn overlapping_domains_are_rejected() {
        let p = PartialProblem::new(square(0.0, 0.0, 1.0), square(0.5, 0.5, 1.0), 0.5).unwrap();
        assert_eq!(check_separation(&p), Err(PartialError::NotSeparated));
        assert!(matches!(
            PartialProblem::new(square(0.0, 0.0, 1.0), square(3.0, 0.0, 1.0), 1.5),
            Err(PartialError::InfeasibleMass { .. })
        ));
    }

    #[test]
    fn grid_weights_sum_to_area() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = grid_samples(&crate::fixtures::l_shape(), 300, &mut rng);
        let total: f64 = g.weights.iter().sum();
        assert!((total - 3.0).abs() < 1e-12);
        assert!(g.points.len() >= 300);
    }

    #[test]
    fn half_mass_squares_move_the_nearest_halves() {
        let sol = solve_partial(&squares(0.5), 400, 1).unwrap();
        assert!(sol.certified);
        sol.plan.check_feasible(0.5).unwrap();
        for &i in &sol.active_source {
            assert!(sol.plan.source_samples[i].x > -1.5 - 0.1);
        }
        for &j in &sol.active_target {
            assert!(sol.plan.target_samples[j].x < 1.5 + 0.1);
        }
        let map = sol.forward_map();
        for &i in &sol.active_source {
            let d = map[i].unwrap() - sol.plan.source_samples[i];
            assert!((d - Point2::new(2.5, 0.0)).norm() < 0.1, "{d:?}");
        }
        assert!(sol.stay_put_residual < 1e-9);
    }

    #[test]
    fn full_mass_translation() {
        let sol = solve_partial(&squares(1.0), 256, 2).unwrap();
        assert!(sol.certified);
        assert_eq!(sol.active_source.len(), sol.plan.source_samples.len());
        assert!(sol.free_boundary.is_none());
        assert_eq!(extract_free_boundary(&sol, sol.spacing()), Err(PartialError::EmptyBoundary));
        // the two grids have independent offsets
        let h = sol.spacing();
        let c = sol.plan.cost();
        assert!((c - 9.0).abs() < h * h, "{c}");
        let map = sol.forward_map();
        for (i, x) in sol.plan.source_samples.iter().enumerate() {
            assert!((map[i].unwrap() - *x - Point2::new(3.0, 0.0)).norm() < 2.0 * h);
        }
    }

    #[test]
    fn flow_matches_the_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let ns = rng.gen_range(3..9);
            let nt = rng.gen_range(3..9);
            let s: Vec<Point2> = (0..ns).map(|_| Point2::new(-rng.gen::<f64>(), rng.gen())).collect();
            let t: Vec<Point2> = (0..nt).map(|_| Point2::new(rng.gen::<f64>(), rng.gen())).collect();
            let a: Vec<f64> = (0..ns).map(|_| rng.gen_range(0.1..1.0)).collect();
            let b: Vec<f64> = (0..nt).map(|_| rng.gen_range(0.1..1.0)).collect();
            let m = 0.7 * a.iter().sum::<f64>().min(b.iter().sum());
            let inst = integer_instance(&s, &a, &t, &b, m);
            let res = min_cost_flow(&inst, &s, &t);
            assert!(res.certified);
            let plan = DiscretePlan {
                source_samples: s.clone(),
                source_weights: a.clone(),
                target_samples: t.clone(),
                target_weights: b.clone(),
                couplings: res.flow.iter().map(|&(i, j, f)| (i, j, f as f64 / inst.mass_scale)).collect(),
            };
            let oracle = crate::oracle::partial_flow_solve(&s, &a, &t, &b, m).unwrap();
            assert!((plan.cost() - oracle.cost()).abs() <= 1e-9 * oracle.cost());
        }
    }
}
