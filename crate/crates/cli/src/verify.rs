//! The acceptance suite over bundled fixtures: one record per criterion.

use std::time::{Duration, Instant};

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::analysis::{partial_level, singular_level, PartialLevel, SingularLevel};
use crate::commands::{partial_checks, NORMAL_TOL};
use crate::config::{RunConfig, DEFAULT_SEED};
use crate::report::{num, CheckRecord, EnvStamp, Report};
use polyot::fixtures::{dumbbell, hexagon, l_shape, square, square_of_area, unit_square};
use polyot::geometry::{Point2, Polygon};
use polyot::oracle::{assignment_solve, partial_flow_solve, plan_cost};
use polyot::otsolve::{
    build_laguerre, dual_gradient, dual_objective, sample_target, solve, NewtonOptions, SemiDiscreteProblem,
    SemiDiscreteSolution,
};
use polyot::partial::{solve_partial, PartialProblem};
use polyot::potential::{legendre, ma_measure, subdifferential_at, subdivision_vertices, PiecewiseAffineConvex};
use polyot::singular::{analyze, detect_singular_edges, SingularOptions};

pub const SOLVER_TOL: f64 = 1e-7;
pub const SOLVER_BUDGET: Duration = Duration::from_secs(120);
pub const FD_TOL: f64 = 1e-5;
pub const ASSIGNMENT_TOL: f64 = 1e-6;
pub const FLOW_TOL: f64 = 1e-9;
pub const SIGMA_LEVELS: [usize; 3] = [800, 3200, 12800];
pub const OBLIQUENESS_RATIO: f64 = 0.5;
pub const GROWTH_RANGE: (f64, f64) = (0.40, 0.60);
pub const DENSITY_MIN: f64 = 0.05;
pub const DENSITY_SPREAD: f64 = 0.20;
pub const CONVEX_LEVELS: [usize; 3] = [50, 200, 800];
pub const PARTIAL_LEVELS: [usize; 3] = [64, 256, 1024];
pub const MASS_FRACTIONS: [f64; 3] = [0.25, 0.5, 0.75];
pub const LEGENDRE_TOL: f64 = 1e-9;
pub const MA_TOL: f64 = 1e-6;
pub const SUITE_BUDGET: Duration = Duration::from_secs(30 * 60);
const LLOYD: usize = 10;

fn anchor(k: usize) -> &'static str {
    match k {
        1 => "complete transport: damped Newton ascent on the dual",
        2 => "optimal plans: agreement with exact discrete solvers",
        3 => "singular set: smooth curves with finitely many special points",
        4 => "singular set: unit normal is the dual segment direction",
        5 => "singular set: normal is oblique to the target boundary",
        6 => "convex targets: no singular set",
        7 => "partial transport: free boundary smooth except finitely many points",
        8 => "singular set: tangential growth and uniform section density",
        9 => "convex analysis: conjugacy, monotone subgradients, Alexandrov measure",
        _ => "plumbing",
    }
}

fn record(k: usize, ok: bool, measured: Value, threshold: Value) -> CheckRecord {
    CheckRecord::new(&format!("C{k}"), anchor(k), ok, measured, threshold)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn c1_solver(seed: u64) -> CheckRecord {
    let mut worst: f64 = 0.0;
    let mut over_budget = 0;
    let mut failures = Vec::new();
    for &n in &CONVEX_LEVELS[..] {
        for k in 0..20u64 {
            let s = seed * 1000 + k;
            let t = Instant::now();
            let out = SemiDiscreteProblem::sampled(unit_square(), l_shape(), n, s, 0)
                .and_then(|p| solve(&p, &NewtonOptions { tol: SOLVER_TOL, ..Default::default() }));
            if t.elapsed() > SOLVER_BUDGET {
                over_budget += 1;
            }
            match out {
                Ok(sol) => worst = worst.max(sol.report.residual),
                Err(e) => failures.push(format!("n={n} seed={s}: {e}")),
            }
        }
    }
    let mut fd_worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..5u64 {
        let (sites, masses) = sample_target(&l_shape(), 5, seed * 1000 + 100 + k, 0, 1.0);
        let w: Vec<f64> = (0..5).map(|_| rng.gen_range(-0.05..0.05)).collect();
        let source = unit_square();
        let Ok(diag) = build_laguerre(&sites, &w, &source) else {
            failures.push(format!("gradient instance {k}: diagram failed"));
            continue;
        };
        let g = dual_gradient(&diag, &masses);
        let eps = 1e-6;
        let mut err: f64 = 0.0;
        for j in 0..5 {
            let f = |d: f64| {
                let mut v = w.clone();
                v[j] += d;
                dual_objective(&build_laguerre(&sites, &v, &source).expect("diagram"), &masses)
            };
            let fd = (f(eps) - f(-eps)) / (2.0 * eps);
            err = err.max((fd - g[j]).abs());
        }
        let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-12);
        fd_worst = fd_worst.max(err / scale);
    }
    let ok = failures.is_empty() && worst <= SOLVER_TOL && over_budget == 0 && fd_worst <= FD_TOL;
    record(
        1,
        ok,
        json!({
            "instances": 3 * 20,
            "max_residual": num(worst),
            "over_budget": over_budget,
            "failures": failures,
            "gradient_rel_error": num(fd_worst),
        }),
        json!({
            "residual": num(SOLVER_TOL),
            "seconds_per_instance": SOLVER_BUDGET.as_secs(),
            "gradient_rel_error": num(FD_TOL),
        }),
    )
}

fn partial_families() -> [(&'static str, Polygon, Polygon); 2] {
    [
        ("squares", square(-2.0, 0.0, 1.0), square(1.0, 0.0, 1.0)),
        ("dumbbell", square(-1.6, 0.25, 1.4), dumbbell()),
    ]
}

pub fn c2_oracles(seed: u64) -> CheckRecord {
    let mut worst_assign: f64 = 0.0;
    let mut failures = Vec::new();
    for (k, &n) in [4usize, 6, 8, 10, 12, 5, 7, 9, 11, 12].iter().enumerate() {
        let s = seed * 1000 + 200 + k as u64;
        let (sites, _) = sample_target(&l_shape(), n, s, 0, 1.0);
        let masses = vec![1.0 / n as f64; n];
        let sol = match SemiDiscreteProblem::new(unit_square(), sites, masses, l_shape())
            .and_then(|p| solve(&p, &NewtonOptions { tol: 1e-12, ..Default::default() }))
        {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("assignment n={n}: {e}"));
                continue;
            }
        };
        let xs: Vec<Point2> = sol.diagram().cells.iter().map(|c| c.centroid()).collect();
        let ys = &sol.problem.sites;
        let induced: f64 = xs.iter().map(|&x| x.dist(ys[sol.potential.map_point(x).site]).powi(2)).sum();
        match assignment_solve(&xs, ys) {
            Ok(a) => worst_assign = worst_assign.max(rel(induced, a.cost)),
            Err(e) => failures.push(format!("assignment n={n}: {e}")),
        }
    }
    let mut worst_flow: f64 = 0.0;
    let fams = partial_families();
    for k in 0..10usize {
        let (_, src, tgt) = &fams[k % 2];
        let frac = [0.25, 0.5, 0.75, 1.0, 0.4][k / 2];
        let n = 12 + 3 * k;
        let out = PartialProblem::new(src.clone(), tgt.clone(), frac * src.area().min(tgt.area()))
            .and_then(|p| solve_partial(&p, n, seed + k as u64));
        let sol = match out {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("partial {k}: {e}"));
                continue;
            }
        };
        let p = &sol.plan;
        match partial_flow_solve(
            &p.source_samples,
            &p.source_weights,
            &p.target_samples,
            &p.target_weights,
            sol.problem.mass,
        ) {
            Ok(o) => worst_flow = worst_flow.max(rel(plan_cost(p), o.cost())),
            Err(e) => failures.push(format!("partial {k}: {e}")),
        }
    }
    record(
        2,
        failures.is_empty() && worst_assign <= ASSIGNMENT_TOL && worst_flow <= FLOW_TOL,
        json!({"assignment_rel_error": num(worst_assign), "flow_rel_error": num(worst_flow), "failures": failures}),
        json!({"assignment": num(ASSIGNMENT_TOL), "flow": num(FLOW_TOL)}),
    )
}

/// Dumbbell solves over the refinement levels, shared by several criteria.
pub struct DumbbellSweep {
    pub solutions: Vec<SemiDiscreteSolution>,
    pub levels: Vec<SingularLevel>,
    pub errors: Vec<String>,
}

pub fn dumbbell_sweep(seed: u64, ns: &[usize]) -> DumbbellSweep {
    let target = dumbbell();
    let source = square_of_area(target.area());
    let mut sweep = DumbbellSweep {
        solutions: Vec::new(),
        levels: Vec::new(),
        errors: Vec::new(),
    };
    for &n in ns {
        let t = Instant::now();
        let out = SemiDiscreteProblem::sampled(source.clone(), target.clone(), n, seed, LLOYD)
            .and_then(|p| solve(&p, &NewtonOptions { tol: SOLVER_TOL, ..Default::default() }));
        match out {
            Ok(sol) => {
                let r = analyze(&sol, &SingularOptions::default());
                sweep.levels.push(singular_level(&sol, &r));
                sweep.solutions.push(sol);
            }
            Err(e) => sweep.errors.push(format!("n={n}: {e}")),
        }
        info!("dumbbell n={n} done in {:.1}s", t.elapsed().as_secs_f64());
    }
    sweep
}

fn complete(sweep: &DumbbellSweep, want: usize) -> bool {
    sweep.errors.is_empty() && sweep.levels.len() == want
}

pub fn c3_structure(sweep: &DumbbellSweep, want: usize) -> CheckRecord {
    let l = &sweep.levels;
    let chains = l.iter().all(|x| x.chains_partition_edges && x.edges > 0);
    let counts = l.iter().all(|x| x.sigma1_clusters <= x.sigma1_bound && x.sigma2pp_clusters <= x.sigma2pp_bound);
    let turning: Vec<f64> = l.iter().map(|x| x.max_turning_angle).collect();
    let monotone = turning.windows(2).all(|w| w[1] < w[0]);
    record(
        3,
        complete(sweep, want) && chains && counts && monotone,
        json!({
            "n": l.iter().map(|x| x.n).collect::<Vec<_>>(),
            "edges": l.iter().map(|x| x.edges).collect::<Vec<_>>(),
            "chains": l.iter().map(|x| x.chains).collect::<Vec<_>>(),
            "chains_partition_edges": chains,
            "sigma1_clusters": l.iter().map(|x| x.sigma1_clusters).collect::<Vec<_>>(),
            "sigma2pp_clusters": l.iter().map(|x| x.sigma2pp_clusters).collect::<Vec<_>>(),
            "max_turning_angle": turning.iter().map(|&t| num(t)).collect::<Vec<_>>(),
            "turning_decreasing": monotone,
            "errors": sweep.errors,
        }),
        json!({
            "sigma1": l.first().map(|x| x.sigma1_bound),
            "sigma2pp": l.first().map(|x| x.sigma2pp_bound),
            "turning": "strictly decreasing",
        }),
    )
}

pub fn c4_normal(sweep: &DumbbellSweep, want: usize) -> CheckRecord {
    let e: Vec<f64> = sweep.levels.iter().map(|x| x.normal_error_max).collect();
    record(
        4,
        complete(sweep, want) && e.iter().all(|&x| x <= NORMAL_TOL),
        json!({"normal_error_max": e.iter().map(|&x| num(x)).collect::<Vec<_>>()}),
        num(NORMAL_TOL),
    )
}

pub fn c5_obliqueness(sweep: &DumbbellSweep, want: usize) -> CheckRecord {
    let mins: Vec<Option<f64>> = sweep.levels.iter().map(|x| x.obliqueness_min).collect();
    let positive = mins.iter().all(|m| m.is_some_and(|d| d > 0.0));
    let ratios: Vec<f64> = mins.windows(2).filter_map(|w| Some(w[1]? / w[0]?)).collect();
    let stable = ratios.len() + 1 == mins.len() && ratios.iter().all(|&r| r >= OBLIQUENESS_RATIO);
    record(
        5,
        complete(sweep, want) && positive && stable,
        json!({
            "obliqueness_min": mins.iter().map(|m| m.map(num)).collect::<Vec<_>>(),
            "ratios": ratios.iter().map(|&r| num(r)).collect::<Vec<_>>(),
            "unmeasured_edges": sweep.levels.iter().map(|x| x.obliqueness_unmeasured).collect::<Vec<_>>(),
        }),
        json!({"min": "> 0", "ratio": num(OBLIQUENESS_RATIO)}),
    )
}

pub fn c6_convex(seed: u64) -> CheckRecord {
    let mut rows = Vec::new();
    let mut ok = true;
    for (name, target) in [("square", square(2.0, 0.0, 1.0)), ("hexagon", hexagon())] {
        for &n in &CONVEX_LEVELS {
            for s in seed..seed + 3 {
                let out = SemiDiscreteProblem::sampled(unit_square(), target.clone(), n, s, 0)
                    .and_then(|p| solve(&p, &NewtonOptions { tol: SOLVER_TOL, ..Default::default() }));
                let edges = match out {
                    Ok(sol) => detect_singular_edges(sol.diagram(), &target, 1e-9 * target.diameter()).len() as i64,
                    Err(_) => -1,
                };
                ok &= edges == 0;
                rows.push(json!([name, n, s, edges]));
            }
        }
    }
    record(6, ok, json!({"target_n_seed_edges": rows}), json!(0))
}

/// Refinement sweeps for every partial family and mass.
pub fn partial_sweeps(seed: u64, ns: &[usize]) -> Vec<(String, Result<Vec<PartialLevel>, String>)> {
    let mut out = Vec::new();
    for (name, src, tgt) in partial_families() {
        for &f in &MASS_FRACTIONS {
            let id = format!("{name}.m{f}");
            let t = Instant::now();
            let res = PartialProblem::new(src.clone(), tgt.clone(), f * src.area().min(tgt.area()))
                .map_err(|e| e.to_string())
                .and_then(|p| {
                    ns.iter()
                        .map(|&n| solve_partial(&p, n, seed).map(|s| partial_level(n, &s)).map_err(|e| e.to_string()))
                        .collect::<Result<Vec<_>, _>>()
                });
            info!("partial {id} done in {:.1}s", t.elapsed().as_secs_f64());
            out.push((id, res));
        }
    }
    out
}

pub fn c7_partial(sweeps: &[(String, Result<Vec<PartialLevel>, String>)]) -> CheckRecord {
    let mut ok = true;
    let mut rows = serde_json::Map::new();
    for (id, res) in sweeps {
        let row = match res {
            Ok(levels) => {
                let checks = partial_checks(id, levels);
                let has = |s: &str| checks.iter().any(|c| c.check_id.ends_with(s));
                let pass = levels.iter().all(|l| l.multiplicity.is_some())
                    && has(".fb_normal")
                    && checks.iter().all(|c| c.passed());
                ok &= pass;
                json!({
                    "pass": pass,
                    "multiplicity": levels.iter().map(|l| l.multiplicity).collect::<Vec<_>>(),
                    "lipschitz": levels.iter().map(|l| l.lipschitz.map(num)).collect::<Vec<_>>(),
                    "interior_ball_violations": levels.iter().map(|l| l.interior_ball_violations).collect::<Vec<_>>(),
                    "fb_normal_error": levels.iter().map(|l| l.fb_normal_error.map(num)).collect::<Vec<_>>(),
                    "f1_f2": levels.iter().map(|l| [l.f1_clusters, l.f2_clusters]).collect::<Vec<_>>(),
                    "bounds": levels.first().map(|l| [l.f1_bound, l.f2_bound]),
                    "free_to_free_pairs": levels.iter().map(|l| l.free_to_free_pairs).collect::<Vec<_>>(),
                    "failed": checks.iter().filter(|c| !c.passed()).map(|c| c.check_id.clone()).collect::<Vec<_>>(),
                })
            }
            Err(e) => {
                ok = false;
                json!({"pass": false, "error": e})
            }
        };
        rows.insert(id.clone(), row);
    }
    record(
        7,
        ok,
        Value::Object(rows),
        json!({
            "multiplicity": 1,
            "interior_ball_violations": 0,
            "interior_ball_tol": "2 x spacing",
            "fb_normal_error": "strictly decreasing",
        }),
    )
}

pub fn c8_diagnostics(sweep: &DumbbellSweep, want: usize) -> CheckRecord {
    let mut ok = complete(sweep, want);
    let mut exps = Vec::new();
    let mut dens = Vec::new();
    for l in &sweep.levels {
        let g = l.growth_exponent;
        ok &= g.is_some_and(|g| (GROWTH_RANGE.0..=GROWTH_RANGE.1).contains(&g));
        let mut d = l.densities.clone();
        d.sort_by(f64::total_cmp);
        let stable = !d.is_empty() && {
            let med = d[d.len() / 2];
            d[0] >= DENSITY_MIN && d.iter().all(|&x| (x - med).abs() <= DENSITY_SPREAD * med)
        };
        ok &= stable;
        exps.push(g.map(num));
        dens.push(l.densities.iter().map(|&x| num(x)).collect::<Vec<_>>());
    }
    record(
        8,
        ok,
        json!({"growth_exponent": exps, "densities": dens}),
        json!({
            "growth_exponent": [num(GROWTH_RANGE.0), num(GROWTH_RANGE.1)],
            "density_min": num(DENSITY_MIN),
            "density_spread": num(DENSITY_SPREAD),
        }),
    )
}

fn random_pa(rng: &mut ChaCha8Rng) -> PiecewiseAffineConvex {
    let k = rng.gen_range(2..12);
    let g: Vec<Point2> = (0..k).map(|_| Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let c: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.5..0.5)).collect();
    PiecewiseAffineConvex::from_parts(&g, &c).expect("nonempty")
}

pub fn c9_convex_analysis(seed: u64, sol: Option<&SemiDiscreteSolution>) -> CheckRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(9));
    let domain = square(-1.0, -1.0, 2.0);
    let slopes = square(-1.0, -1.0, 2.0);
    let mut involution: f64 = 0.0;
    let mut violations = 0usize;
    let mut pairs = 0usize;
    for _ in 0..100 {
        let f = random_pa(&mut rng);
        let back = legendre(&legendre(&f, &domain), &slopes);
        let mut pts = subdivision_vertices(&f, &domain);
        pts.extend((0..20).map(|_| Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
        for &x in &pts {
            involution = involution.max((back.evaluate(x) - f.evaluate(x)).abs());
        }
        let sub: Vec<(Point2, Vec<Point2>)> =
            pts.iter().map(|&x| (x, subdifferential_at(&f, x, 1e-9).hull.into_vertices())).collect();
        for a in 0..sub.len() {
            for b in a + 1..sub.len() {
                let dx = sub[a].0 - sub[b].0;
                for &p in &sub[a].1 {
                    for &q in &sub[b].1 {
                        pairs += 1;
                        if (p - q).dot(dx) < -1e-12 {
                            violations += 1;
                        }
                    }
                }
            }
        }
    }
    let (ma, area) = match sol {
        Some(s) => {
            let v = legendre(&s.potential.u, &s.problem.source);
            (ma_measure(&v, &s.problem.target), s.problem.target.area())
        }
        None => (f64::NAN, f64::NAN),
    };
    let ma_err = rel(ma, area);
    record(
        9,
        involution <= LEGENDRE_TOL && violations == 0 && ma_err <= MA_TOL,
        json!({
            "involution_error": num(involution),
            "monotonicity_pairs": pairs,
            "monotonicity_violations": violations,
            "ma_measure": num(ma),
            "target_area": num(area),
            "ma_rel_error": num(ma_err),
        }),
        json!({"involution": num(LEGENDRE_TOL), "violations": 0, "ma_rel_error": num(MA_TOL)}),
    )
}

/// Criteria 1 to 9, in order.
pub fn criteria(seed: u64) -> Vec<CheckRecord> {
    let t = Instant::now();
    let mut out = vec![c1_solver(seed), c2_oracles(seed)];
    info!("C1-C2 {:.1}s", t.elapsed().as_secs_f64());
    let sweep = dumbbell_sweep(seed, &SIGMA_LEVELS);
    let want = SIGMA_LEVELS.len();
    out.push(c3_structure(&sweep, want));
    out.push(c4_normal(&sweep, want));
    out.push(c5_obliqueness(&sweep, want));
    out.push(c6_convex(seed));
    info!("C3-C6 {:.1}s", t.elapsed().as_secs_f64());
    out.push(c7_partial(&partial_sweeps(seed, &PARTIAL_LEVELS)));
    info!("C7 {:.1}s", t.elapsed().as_secs_f64());
    out.push(c8_diagnostics(&sweep, want));
    out.push(c9_convex_analysis(seed, sweep.solutions.first()));
    info!("C8-C9 {:.1}s", t.elapsed().as_secs_f64());
    out
}

fn to_bytes(records: &[CheckRecord]) -> String {
    serde_json::to_string(records).expect("serializable")
}

/// Runs the suite twice and adds the determinism and time-budget record.
pub fn run(cfg: &RunConfig) -> Report {
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let t = Instant::now();
    let first = criteria(seed);
    let second = criteria(seed);
    let elapsed = t.elapsed();
    info!("suite ran twice in {:.1}s", elapsed.as_secs_f64());
    let identical = to_bytes(&first) == to_bytes(&second);
    let mut report = Report::new("verify", EnvStamp::new(seed, SIGMA_LEVELS[0]));
    report.checks = first;
    report.push(record(
        10,
        identical && elapsed <= SUITE_BUDGET,
        json!({"identical_reruns": identical, "within_budget": elapsed <= SUITE_BUDGET}),
        json!({"identical_reruns": true, "seconds": SUITE_BUDGET.as_secs()}),
    ));
    report
}
