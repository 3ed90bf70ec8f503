use itertools::Itertools;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polyot::oracle::{assignment_solve, partial_flow_solve, plan_cost};
use polyot::Point2;

fn cloud(n: usize, rng: &mut ChaCha8Rng, dx: f64) -> Vec<Point2> {
    (0..n).map(|_| Point2::new(dx + rng.gen::<f64>(), rng.gen())).collect()
}

fn perm_cost(x: &[Point2], y: &[Point2], p: &[usize]) -> f64 {
    p.iter().enumerate().map(|(i, &j)| x[i].dist(y[j]).powi(2)).sum()
}

#[test]
fn assignment_beats_every_permutation_of_eight() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3 {
        let (x, y) = (cloud(8, &mut rng, 0.0), cloud(8, &mut rng, 0.5));
        let a = assignment_solve(&x, &y).unwrap();
        let best = (0..8)
            .permutations(8)
            .map(|p| perm_cost(&x, &y, &p))
            .fold(f64::INFINITY, f64::min);
        assert!((a.cost - best).abs() <= 1e-9 * best.max(1.0), "{} vs {best}", a.cost);
        assert!((perm_cost(&x, &y, &a.permutation) - a.cost).abs() <= 1e-12);
    }
}

#[test]
fn no_random_permutation_beats_assignment() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (x, y) = (cloud(40, &mut rng, 0.0), cloud(40, &mut rng, 0.3));
    let a = assignment_solve(&x, &y).unwrap();
    let mut p: Vec<usize> = (0..40).collect();
    for _ in 0..1000 {
        p.shuffle(&mut rng);
        assert!(perm_cost(&x, &y, &p) >= a.cost - 1e-12);
    }
}

/// Cheapest matching of `k` sources to `k` distinct targets; with unit
/// weights the flow polytope is integral, so this is the partial optimum.
fn brute_partial(x: &[Point2], y: &[Point2], k: usize) -> f64 {
    let mut best = f64::INFINITY;
    for s in (0..x.len()).combinations(k) {
        for t in (0..y.len()).permutations(k) {
            let c: f64 = s.iter().zip(&t).map(|(&i, &j)| x[i].dist(y[j]).powi(2)).sum();
            best = best.min(c);
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partial_flow_matches_enumeration(seed in 0u64..10_000, ns in 2usize..6, nt in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (cloud(ns, &mut rng, -1.2), cloud(nt, &mut rng, 0.2));
        let k = rng.gen_range(1..=ns.min(nt));
        let plan = partial_flow_solve(&x, &vec![1.0; ns], &y, &vec![1.0; nt], k as f64).unwrap();
        prop_assert!(plan.check_feasible(k as f64).is_ok());
        let best = brute_partial(&x, &y, k);
        prop_assert!((plan_cost(&plan) - best).abs() <= 1e-9 * best.max(1.0), "{} vs {}", plan_cost(&plan), best);
        prop_assert!(plan.monotonicity_defect() <= 1e-9);
    }

    #[test]
    fn full_mass_flow_is_assignment(seed in 0u64..10_000, n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (cloud(n, &mut rng, 0.0), cloud(n, &mut rng, 0.0));
        let plan = partial_flow_solve(&x, &vec![1.0; n], &y, &vec![1.0; n], n as f64).unwrap();
        let a = assignment_solve(&x, &y).unwrap();
        prop_assert!((plan_cost(&plan) - a.cost).abs() <= 1e-9 * a.cost.max(1.0));
    }
}

#[test]
fn rejects_bad_inputs() {
    let p = [Point2::ZERO];
    assert!(assignment_solve(&p, &[]).is_err());
    assert!(partial_flow_solve(&p, &[1.0], &p, &[1.0], 2.0).is_err());
}
