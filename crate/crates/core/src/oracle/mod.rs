//! Brute-force references: exact assignment, min-cost partial flow,
//! definition-level subgradients and plan costs.

mod assignment;
mod flow;

use crate::geometry::{ConvexPolygon, Point2};

pub use crate::partial::plan_cost;
pub use assignment::{assignment_solve, Assignment};
pub use flow::partial_flow_solve;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("{sources} sources but {targets} targets")]
    SizeMismatch { sources: usize, targets: usize },
    #[error("mass {mass} exceeds the available {available}")]
    InfeasibleMass { mass: f64, available: f64 },
    #[error("instance of size {0} is above the oracle limit")]
    TooLarge(usize),
}

/// Square lattice of candidate slopes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeLattice {
    pub lo: Point2,
    pub hi: Point2,
    pub pitch: f64,
}

impl SlopeLattice {
    pub fn points(&self) -> Vec<Point2> {
        let nx = ((self.hi.x - self.lo.x) / self.pitch).floor() as usize;
        let ny = ((self.hi.y - self.lo.y) / self.pitch).floor() as usize;
        let mut v = Vec::with_capacity((nx + 1) * (ny + 1));
        for i in 0..=nx {
            for j in 0..=ny {
                v.push(Point2::new(self.lo.x + i as f64 * self.pitch, self.lo.y + j as f64 * self.pitch));
            }
        }
        v
    }
}

/// Slopes `p` with `f(y) >= f(x0) + p . (y - x0) - tol` at every grid point,
/// returned as the hull of the lattice cells (side `pitch`) around the feasible lattice points.
pub fn grid_subdifferential(
    f: impl Fn(Point2) -> f64,
    x0: Point2,
    grid: &[Point2],
    lattice: &SlopeLattice,
    tol: f64,
) -> ConvexPolygon {
    let f0 = f(x0);
    let vals: Vec<(Point2, f64)> = grid.iter().map(|&y| (y - x0, f(y) - f0)).collect();
    let h = 0.5 * lattice.pitch;
    let mut corners = Vec::new();
    for p in lattice.points() {
        if vals.iter().all(|&(d, df)| df >= p.dot(d) - tol) {
            for (sx, sy) in [(-h, -h), (h, -h), (h, h), (-h, h)] {
                corners.push(Point2::new(p.x + sx, p.y + sy));
            }
        }
    }
    ConvexPolygon::hull(&corners)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partial::DiscretePlan;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn two_point_assignment() {
        let a = assignment_solve(&[p(0.0, 0.0), p(0.0, 1.0)], &[p(1.0, 0.0), p(1.0, 1.0)]).unwrap();
        assert_eq!(a.permutation, vec![0, 1]);
        assert_eq!(a.cost, 2.0);
        let one = assignment_solve(&[p(3.0, 1.0)], &[p(0.0, 5.0)]).unwrap();
        assert_eq!(one.permutation, vec![0]);
        assert_eq!(one.cost, 25.0);
        assert!(matches!(
            assignment_solve(&[p(0.0, 0.0)], &[]),
            Err(OracleError::SizeMismatch { sources: 1, targets: 0 })
        ));
    }

    fn line_instance() -> (Vec<Point2>, Vec<Point2>) {
        (vec![p(-1.0, 0.0), p(-2.0, 0.0)], vec![p(1.0, 0.0), p(2.0, 0.0)])
    }

    #[test]
    fn partial_flow_line_examples() {
        let (s, t) = line_instance();
        let w = [1.0, 1.0];
        let one = partial_flow_solve(&s, &w, &t, &w, 1.0).unwrap();
        assert_eq!(one.couplings, vec![(0, 0, 1.0)]);
        assert!((one.cost() - 4.0).abs() < 1e-12);
        let two = partial_flow_solve(&s, &w, &t, &w, 2.0).unwrap();
        // -1 -> 2 and -2 -> 1: 9 + 9 beats 4 + 16
        assert!((two.cost() - 18.0).abs() < 1e-12);
        let mut c = two.couplings.clone();
        c.sort_by_key(|x| x.0);
        assert_eq!(c.iter().map(|x| (x.0, x.1)).collect::<Vec<_>>(), vec![(0, 1), (1, 0)]);
        let half = partial_flow_solve(&s, &w, &t, &w, 0.5).unwrap();
        assert_eq!(half.couplings, vec![(0, 0, 0.5)]);
        assert!(matches!(
            partial_flow_solve(&s, &w, &t, &w, 2.5),
            Err(OracleError::InfeasibleMass { .. })
        ));
    }

    #[test]
    fn plan_costs() {
        let empty = DiscretePlan {
            source_samples: vec![],
            source_weights: vec![],
            target_samples: vec![],
            target_weights: vec![],
            couplings: vec![],
        };
        assert_eq!(plan_cost(&empty), 0.0);
        let one = DiscretePlan {
            source_samples: vec![p(0.0, 0.0)],
            source_weights: vec![1.0],
            target_samples: vec![p(3.0, 0.0)],
            target_weights: vec![1.0],
            couplings: vec![(0, 0, 1.0)],
        };
        assert_eq!(plan_cost(&one), 9.0);
    }

    fn disc_grid(x0: Point2, r: f64, k: usize) -> Vec<Point2> {
        let mut v = Vec::new();
        for i in 0..=k {
            for j in 0..=k {
                let q = p(x0.x - r + 2.0 * r * i as f64 / k as f64, x0.y - r + 2.0 * r * j as f64 / k as f64);
                v.push(q);
            }
        }
        v
    }

    #[test]
    fn abs_value_subgradient_is_a_segment() {
        let pitch = 0.05;
        let lat = SlopeLattice {
            lo: p(-2.0, -2.0),
            hi: p(2.0, 2.0),
            pitch,
        };
        let hull = grid_subdifferential(|x| x.x.abs(), Point2::ZERO, &disc_grid(Point2::ZERO, 1.0, 40), &lat, 1e-12);
        // Hausdorff distance to the segment (-1,0)-(1,0)
        let seg = crate::geometry::Segment::new(p(-1.0, 0.0), p(1.0, 0.0));
        let far = hull.vertices().iter().map(|&v| seg.distance_to_point(v)).fold(0.0, f64::max);
        assert!(far <= 2.0 * pitch);
        assert!(hull.contains(p(-1.0, 0.0), 1e-12) && hull.contains(p(1.0, 0.0), 1e-12));
    }

    #[test]
    fn quadratic_subgradient_is_one_cell() {
        let pitch = 0.1;
        let lat = SlopeLattice {
            lo: p(-1.0, -1.0),
            hi: p(1.0, 1.0),
            pitch,
        };
        let x0 = p(0.3, -0.2);
        let hull = grid_subdifferential(|x| 0.5 * x.norm2(), x0, &disc_grid(x0, 0.5, 50), &lat, 1e-3);
        assert!((hull.area() - pitch * pitch).abs() < 1e-12);
        assert!(hull.contains(x0, 1e-12));
    }
}
