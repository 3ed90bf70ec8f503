//! Discrete transport plans and the integer scaling shared by the flow solvers.

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;

/// Weighted source and target samples with sparse couplings `(i, j, mass)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretePlan {
    pub source_samples: Vec<Point2>,
    pub source_weights: Vec<f64>,
    pub target_samples: Vec<Point2>,
    pub target_weights: Vec<f64>,
    pub couplings: Vec<(usize, usize, f64)>,
}

impl DiscretePlan {
    pub fn total_mass(&self) -> f64 {
        self.couplings.iter().map(|c| c.2).sum()
    }

    /// Mass leaving each source sample.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.source_samples.len()];
        for &(i, _, m) in &self.couplings {
            r[i] += m;
        }
        r
    }

    /// Mass arriving at each target sample.
    pub fn col_sums(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.target_samples.len()];
        for &(_, j, m) in &self.couplings {
            c[j] += m;
        }
        c
    }

    pub fn cost(&self) -> f64 {
        plan_cost(self)
    }

    /// Checks the marginal inequalities and the total mass `m`.
    pub fn check_feasible(&self, m: f64) -> Result<(), String> {
        let eps = 1e-9 * m.max(1e-300);
        if let Some(c) = self.couplings.iter().find(|c| !(c.2 >= 0.0)) {
            return Err(format!("negative coupling {c:?}"));
        }
        for (i, (r, a)) in self.row_sums().iter().zip(&self.source_weights).enumerate() {
            if *r > a + eps {
                return Err(format!("source {i} sends {r} > {a}"));
            }
        }
        for (j, (c, b)) in self.col_sums().iter().zip(&self.target_weights).enumerate() {
            if *c > b + eps {
                return Err(format!("target {j} receives {c} > {b}"));
            }
        }
        let t = self.total_mass();
        if (t - m).abs() > eps {
            return Err(format!("total mass {t} differs from {m}"));
        }
        Ok(())
    }

    /// Largest violation of `c(x_i, y_k) + c(x_j, y_l) <= c(x_i, y_l) + c(x_j, y_k)`
    /// over pairs of couplings `(i, k)`, `(j, l)`; zero for a cyclically monotone support.
    pub fn monotonicity_defect(&self) -> f64 {
        let c = |i: usize, j: usize| self.source_samples[i].dist(self.target_samples[j]).powi(2);
        let mut worst: f64 = 0.0;
        for (a, &(i, k, _)) in self.couplings.iter().enumerate() {
            for &(j, l, _) in &self.couplings[a + 1..] {
                worst = worst.max(c(i, k) + c(j, l) - c(i, l) - c(j, k));
            }
        }
        worst
    }
}

/// `sum mass * |x - y|^2`.
pub fn plan_cost(plan: &DiscretePlan) -> f64 {
    plan.couplings
        .iter()
        .map(|&(i, j, m)| m * plan.source_samples[i].dist(plan.target_samples[j]).powi(2))
        .sum()
}

/// Integer masses and costs for exact flow arithmetic.
#[derive(Clone, Debug)]
pub struct IntegerInstance {
    pub supply: Vec<i64>,
    pub demand: Vec<i64>,
    pub flow: i64,
    /// Integer units per unit of mass.
    pub mass_scale: f64,
    /// Integer units per unit of squared distance.
    pub cost_scale: f64,
}

/// Mass units of `1e-12`; cost units of `1e-12` in squared distance unless
/// that would overflow path lengths, then coarser.
pub fn integer_instance(
    sources: &[Point2],
    a: &[f64],
    targets: &[Point2],
    b: &[f64],
    m: f64,
) -> IntegerInstance {
    let total = a.iter().sum::<f64>().max(b.iter().sum::<f64>()).max(m);
    let mass_scale = 1e12 / total.max(1e-300);
    let q = |x: f64| (x * mass_scale).round() as i64;
    let mut max_c: f64 = 0.0;
    for s in sources {
        for t in targets {
            max_c = max_c.max(s.dist(*t).powi(2));
        }
    }
    let nodes = (sources.len() + targets.len() + 2) as f64;
    let cost_scale = 1e12f64.min(1e18 / (nodes * max_c.max(1e-300)));
    let supply: Vec<i64> = a.iter().map(|&x| q(x)).collect();
    let demand: Vec<i64> = b.iter().map(|&x| q(x)).collect();
    // rounding must not make the full-mass case infeasible
    let flow = q(m).min(supply.iter().sum()).min(demand.iter().sum());
    IntegerInstance {
        supply,
        demand,
        flow,
        mass_scale,
        cost_scale,
    }
}

impl IntegerInstance {
    pub fn cost(&self, x: Point2, y: Point2) -> i64 {
        (x.dist(y).powi(2) * self.cost_scale).round() as i64
    }
}
