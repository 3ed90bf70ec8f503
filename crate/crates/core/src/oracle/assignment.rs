use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::geometry::Point2;

/// `permutation[i]` is the target paired with source `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub permutation: Vec<usize>,
    pub cost: f64,
}

const MAX_N: usize = 2000;

/// Minimum total squared distance pairing (Hungarian method with potentials
/// on costs rounded to `1e-12`).
pub fn assignment_solve(sources: &[Point2], targets: &[Point2]) -> Result<Assignment, OracleError> {
    let n = sources.len();
    if targets.len() != n {
        return Err(OracleError::SizeMismatch {
            sources: n,
            targets: targets.len(),
        });
    }
    if n > MAX_N {
        return Err(OracleError::TooLarge(n));
    }
    if n == 0 {
        return Ok(Assignment {
            permutation: vec![],
            cost: 0.0,
        });
    }
    let mut max_c: f64 = 0.0;
    for s in sources {
        for t in targets {
            max_c = max_c.max(s.dist(*t).powi(2));
        }
    }
    let scale = 1e12f64.min(1e17 / (n as f64 * max_c.max(1e-300)));
    let cost = |i: usize, j: usize| (sources[i].dist(targets[j]).powi(2) * scale).round() as i64;
    // 1-based rows/columns; column 0 is the virtual start
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    let cost = perm.iter().enumerate().map(|(i, &j)| sources[i].dist(targets[j]).powi(2)).sum();
    Ok(Assignment {
        permutation: perm,
        cost,
    })
}
