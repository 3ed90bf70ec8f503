use polyot::fixtures::{dumbbell, square};
use polyot::oracle::{partial_flow_solve, plan_cost};
use polyot::partial::{interior_ball_violations, solve_partial, PartialProblem, PartialSolution};

fn squares(mass: f64, n: usize) -> PartialSolution {
    let p = PartialProblem::new(square(-2.0, 0.0, 1.0), square(1.0, 0.0, 1.0), mass).unwrap();
    solve_partial(&p, n, 1).unwrap()
}

fn flags(len: usize, active: &[usize]) -> Vec<bool> {
    let mut v = vec![false; len];
    for &i in active {
        v[i] = true;
    }
    v
}

#[test]
fn plan_is_optimal_on_its_samples() {
    let sol = squares(0.4, 64);
    let p = &sol.plan;
    let oracle = partial_flow_solve(&p.source_samples, &p.source_weights, &p.target_samples, &p.target_weights, 0.4).unwrap();
    let (a, b) = (plan_cost(p), plan_cost(&oracle));
    assert!((a - b).abs() <= 1e-9 * b, "{a} vs {b}");
    assert!(p.check_feasible(0.4).is_ok());
    assert!(p.monotonicity_defect() <= 1e-12);
}

#[test]
fn active_regions_grow_with_mass() {
    // same grids (same seed and n), increasing mass
    let fr: Vec<Vec<f64>> = [0.2, 0.4, 0.6, 0.8].iter().map(|&m| squares(m, 256).source_fraction).collect();
    for w in fr.windows(2) {
        let shrunk = w[0].iter().zip(&w[1]).filter(|(a, b)| **b < **a - 1e-9).count();
        assert_eq!(shrunk, 0);
    }
}

#[test]
fn swapped_couplings_break_monotonicity_and_balls() {
    let sol = squares(0.5, 256);
    let mut plan = sol.plan.clone();
    assert!(plan.monotonicity_defect() <= 1e-12);
    // pair the lowest source with the highest target and vice versa
    let c = &plan.couplings;
    let lo = (0..c.len()).min_by(|&a, &b| plan.source_samples[c[a].0].y.partial_cmp(&plan.source_samples[c[b].0].y).unwrap()).unwrap();
    let hi = (0..c.len()).max_by(|&a, &b| plan.source_samples[c[a].0].y.partial_cmp(&plan.source_samples[c[b].0].y).unwrap()).unwrap();
    let (tl, th) = (plan.couplings[lo].1, plan.couplings[hi].1);
    plan.couplings[lo].1 = th;
    plan.couplings[hi].1 = tl;
    assert!(plan.monotonicity_defect() > 1e-3);

    // a coupling that reaches far out forces inactive samples into its ball
    let mut far = sol.plan.clone();
    let src = flags(far.source_samples.len(), &sol.active_source);
    let tgt = flags(far.target_samples.len(), &sol.active_target);
    assert_eq!(interior_ball_violations(&far, &src, &tgt, 2.0 * sol.spacing()), 0);
    let deep = (0..far.target_samples.len()).max_by(|&a, &b| far.target_samples[a].x.partial_cmp(&far.target_samples[b].x).unwrap()).unwrap();
    far.couplings[0].1 = deep;
    assert!(interior_ball_violations(&far, &src, &tgt, 2.0 * sol.spacing()) > 0);
}

#[test]
fn tiny_mass_moves_the_closest_samples() {
    let sol = squares(1e-3, 256);
    assert!(sol.certified);
    assert!(sol.plan.check_feasible(1e-3).is_ok());
    // only samples next to the gap are used
    let h = sol.spacing();
    let gap = sol.plan.target_samples.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    for &(_, j, _) in &sol.plan.couplings {
        assert!(sol.plan.target_samples[j].x <= gap + 2.0 * h);
    }
}

#[test]
fn dumbbell_target_is_certified() {
    let t = dumbbell();
    let p = PartialProblem::new(square(-1.6, 0.25, 1.4), t, 0.5).unwrap();
    let sol = solve_partial(&p, 256, 2).unwrap();
    assert!(sol.certified);
    assert_eq!(sol.stay_put_residual, 0.0);
    assert!(sol.free_boundary.is_some());
}

#[test]
fn overlapping_domains_rejected() {
    let p = PartialProblem::new(square(0.0, 0.0, 1.0), square(0.5, 0.0, 1.0), 0.3).unwrap();
    assert!(solve_partial(&p, 64, 1).is_err());
    assert!(PartialProblem::new(square(-2.0, 0.0, 1.0), square(1.0, 0.0, 1.0), 1.5).is_err());
}
