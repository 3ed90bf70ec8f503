//! Discretisation of the target into weighted sites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Location, Point2, Polygon};
use crate::potential::{cells_in_polygon, MaxAffineIndex};

/// Voronoi cell areas and centroids of `sites` restricted to `target`.
pub fn voronoi_moments(target: &Polygon, sites: &[Point2]) -> (Vec<f64>, Vec<Point2>) {
    let c: Vec<f64> = sites.iter().map(|y| -0.5 * y.norm2()).collect();
    let idx = MaxAffineIndex::new(sites, &c);
    let n = sites.len();
    let mut area = vec![0.0; n];
    let mut moment = vec![Point2::ZERO; n];
    for (k, cell) in cells_in_polygon(&idx, target) {
        let a = cell.area();
        area[k] += a;
        moment[k] += cell.centroid() * a;
    }
    let centroids = (0..n)
        .map(|k| if area[k] > 0.0 { moment[k] / area[k] } else { sites[k] })
        .collect();
    (area, centroids)
}

/// `n` sites strictly inside `target` with masses proportional to their
/// Voronoi areas in `target`, rescaled to sum to `total_mass`.
///
/// Sites start as seeded uniform samples and undergo `lloyd_iters` steps of
/// Lloyd relaxation; a centroid that falls outside the target keeps the old
/// site.
pub fn sample_target(target: &Polygon, n: usize, seed: u64, lloyd_iters: usize, total_mass: f64) -> (Vec<Point2>, Vec<f64>) {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = target.bbox();
    let tol = 1e-9 * target.diameter();
    let mut sites = Vec::with_capacity(n);
    while sites.len() < n {
        let p = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if target.locate(p, tol) == Location::Inside {
            sites.push(p);
        }
    }
    let (mut area, mut cen) = voronoi_moments(target, &sites);
    for _ in 0..lloyd_iters {
        for k in 0..n {
            if target.locate(cen[k], tol) == Location::Inside {
                sites[k] = cen[k];
            }
        }
        (area, cen) = voronoi_moments(target, &sites);
    }
    let total: f64 = area.iter().sum();
    let masses = area.iter().map(|a| a / total * total_mass).collect();
    (sites, masses)
}
