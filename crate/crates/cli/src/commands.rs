use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{partial_level, singular_level, PartialLevel, SingularLevel};
use crate::config::{RunConfig, DEFAULT_N, DEFAULT_SEED, DEFAULT_TOL};
use crate::error::CliError;
use crate::report::{num, CheckRecord, EnvStamp, Report};
use crate::verify;
use polyot::geometry::Point2;
use polyot::io::{read_json, write_json, write_text, PartialProblemFile, ProblemFile, SolutionFile};
use polyot::otsolve::{solve, NewtonOptions, OtError, SemiDiscreteProblem, SemiDiscreteSolution};
use polyot::partial::{solve_partial, FbClass, PartialError, PartialProblem, PartialSolution, RigidTransform};
use polyot::singular::{analyze, SingularOptions, SingularReport};
use polyot::svg;

pub const NORMAL_TOL: f64 = 1e-9;

pub fn ot_error(e: OtError) -> CliError {
    match e {
        OtError::NewtonStall { .. } | OtError::EmptyCellUnrecoverable | OtError::DisconnectedDiagram => {
            CliError::Solver(e.to_string())
        }
        e => CliError::Input(e.to_string()),
    }
}

fn partial_error(e: PartialError) -> CliError {
    match e {
        PartialError::NotSeparated => CliError::Solver(e.to_string()),
        e => CliError::Input(e.to_string()),
    }
}

fn forced(report: &mut Report, cfg: &RunConfig) {
    if cfg.force_fail {
        report.push(CheckRecord::new("forced", "plumbing", false, json!(false), json!(true)));
    }
}

fn finish(report: Report, cfg: &RunConfig) -> Result<Report, CliError> {
    write_text(&cfg.out("report.json"), &report.to_json())?;
    Ok(report)
}

/// Cost `sum_j ∫_{cell_j} |x - y_j|^2` of the Laguerre map.
pub fn transport_cost(sol: &SemiDiscreteSolution) -> f64 {
    let d = sol.diagram();
    d.cells
        .iter()
        .zip(&d.sites)
        .filter(|(c, _)| c.len() >= 3)
        .map(|(c, &y)| {
            let (a, m, s) = c.moments();
            s[0] + s[2] + a * m.dist(y).powi(2)
        })
        .sum()
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Report, CliError> {
    let file: ProblemFile = read_json(cfg.problem()?)?;
    let n = cfg.n_sites.or(file.n_sites).unwrap_or(DEFAULT_N);
    let seed = cfg.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let tol = cfg.tol.or(file.tol).unwrap_or(DEFAULT_TOL);
    let prob = SemiDiscreteProblem::sampled(file.source, file.target, n, seed, file.lloyd.unwrap_or(0)).map_err(ot_error)?;
    let sol = solve(&prob, &NewtonOptions { tol, ..Default::default() }).map_err(ot_error)?;
    info!("solved n={n} in {} iterations, residual {:e}", sol.report.iters, sol.report.residual);
    write_json(&cfg.out("solution.json"), &SolutionFile::from_solution(&sol))?;
    write_text(&cfg.out("cells.svg"), &svg::cells_svg(sol.diagram(), &sol.problem.target))?;
    let mut report = Report::new("solve", EnvStamp::new(seed, n));
    report.push(CheckRecord::new(
        "solve.residual",
        "complete transport: cell masses match the target masses",
        sol.report.residual <= tol,
        num(sol.report.residual),
        num(tol),
    ));
    report.details = json!({
        "iterations": sol.report.iters,
        "cost": num(transport_cost(&sol)),
    });
    forced(&mut report, cfg);
    finish(report, cfg)
}

/// Node list entry of the singular JSON.
#[derive(Serialize)]
struct NodeOut {
    position: Point2,
    degree: usize,
    class: Option<&'static str>,
    vertices: Vec<usize>,
    edges: Vec<usize>,
}

fn singular_graph_json(r: &SingularReport) -> Value {
    let mut nodes: Vec<NodeOut> = r
        .graph
        .nodes
        .iter()
        .map(|n| NodeOut {
            position: n.position,
            degree: n.degree(),
            class: None,
            vertices: vec![],
            edges: vec![],
        })
        .collect();
    for c in &r.classes {
        let n = &mut nodes[c.node];
        n.class = Some(c.tag.as_str());
        n.vertices = c.vertices.clone();
        n.edges = c.edges.clone();
    }
    let edges: Vec<Value> = r
        .graph
        .edges
        .iter()
        .zip(&r.graph.edge_nodes)
        .map(|(e, &(a, b))| json!({"cells": [e.cell_pair.0, e.cell_pair.1], "nodes": [a, b], "edge": e.edge, "dual": e.dual}))
        .collect();
    json!({
        "edges": edges,
        "nodes": nodes,
        "chains": r.graph.chains,
        "sigma1_clusters": r.sigma1_clusters,
        "sigma2pp_clusters": r.sigma2pp_clusters,
        "bounds": [r.sigma1_max, r.sigma2pp_max],
        "diagnostics": r.diagnostics(),
    })
}

/// Checks over a refinement sweep of the singular set. The turning-angle
/// check needs at least two levels with edges.
pub fn singular_checks(levels: &[SingularLevel]) -> Vec<CheckRecord> {
    let ne: Vec<Value> = levels.iter().map(|l| num(l.normal_error_max)).collect();
    let mut out = vec![
        CheckRecord::new(
            "singular.normal",
            "singular set: unit normal is the dual segment direction",
            levels.iter().all(|l| l.normal_error_max <= NORMAL_TOL),
            json!(ne),
            num(NORMAL_TOL),
        ),
        CheckRecord::new(
            "singular.chains",
            "singular set: union of curves",
            levels.iter().all(|l| l.chains_partition_edges),
            json!(levels.iter().map(|l| l.chains).collect::<Vec<_>>()),
            json!("every edge on one chain"),
        ),
        CheckRecord::new(
            "singular.counts",
            "singular set: finitely many special points",
            levels.iter().all(|l| l.sigma1_clusters <= l.sigma1_bound && l.sigma2pp_clusters <= l.sigma2pp_bound),
            json!(levels.iter().map(|l| [l.sigma1_clusters, l.sigma2pp_clusters]).collect::<Vec<_>>()),
            json!(levels.first().map(|l| [l.sigma1_bound, l.sigma2pp_bound])),
        ),
        CheckRecord::new(
            "singular.obliqueness",
            "singular set: normal is oblique to the target boundary",
            levels.iter().all(|l| l.obliqueness_min.map_or(l.edges == 0, |d| d > 0.0)),
            json!(levels.iter().map(|l| l.obliqueness_min.map(num)).collect::<Vec<_>>()),
            json!("> 0"),
        ),
    ];
    let turning: Vec<f64> = levels.iter().filter(|l| l.edges > 0).map(|l| l.max_turning_angle).collect();
    if turning.len() >= 2 {
        out.push(CheckRecord::new(
            "singular.turning",
            "singular set: curves are smooth away from special points",
            turning.windows(2).all(|w| w[1] < w[0]),
            json!(turning.iter().map(|&t| num(t)).collect::<Vec<_>>()),
            json!("strictly decreasing"),
        ));
    }
    out
}

pub fn refinement(n: usize, levels: usize) -> Vec<usize> {
    (0..levels).map(|k| n * 4usize.pow(k as u32)).collect()
}

pub fn cmd_singular(cfg: &RunConfig) -> Result<Report, CliError> {
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let opts = SingularOptions::default();
    let sols: Vec<SemiDiscreteSolution> = match &cfg.solution_path {
        Some(p) => {
            let file: SolutionFile = read_json(p)?;
            vec![file
                .into_solution()
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?]
        }
        None => {
            let file: ProblemFile = read_json(cfg.problem()?)?;
            let n = cfg.n_sites.or(file.n_sites).unwrap_or(DEFAULT_N);
            let seed = cfg.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
            let tol = cfg.tol.or(file.tol).unwrap_or(DEFAULT_TOL);
            let mut v = Vec::new();
            for nk in refinement(n, cfg.refinement_levels) {
                let prob = SemiDiscreteProblem::sampled(
                    file.source.clone(),
                    file.target.clone(),
                    nk,
                    seed,
                    file.lloyd.unwrap_or(0),
                )
                .map_err(ot_error)?;
                v.push(solve(&prob, &NewtonOptions { tol, ..Default::default() }).map_err(ot_error)?);
            }
            v
        }
    };
    let reports: Vec<SingularReport> = sols.iter().map(|s| analyze(s, &opts)).collect();
    let levels: Vec<SingularLevel> = sols.iter().zip(&reports).map(|(s, r)| singular_level(s, r)).collect();
    let (fine_sol, fine) = (sols.last().expect("one level"), reports.last().expect("one level"));
    write_text(&cfg.out("singular.svg"), &svg::singular_svg(fine_sol.diagram(), &fine_sol.problem.target, fine))?;
    write_json(&cfg.out("singular.json"), &json!({"levels": levels, "finest": singular_graph_json(fine)}))?;
    let mut report = Report::new("singular", EnvStamp::new(seed, levels[0].n));
    for c in singular_checks(&levels) {
        report.push(c);
    }
    report.details = json!({ "levels": levels });
    forced(&mut report, cfg);
    let normal_ok = report.checks[0].passed();
    let report = finish(report, cfg)?;
    if !normal_ok {
        return Err(CliError::Solver("singular edge not perpendicular to its dual segment".into()));
    }
    Ok(report)
}

/// Checks over a refinement sweep of one partial instance.
pub fn partial_checks(prefix: &str, levels: &[PartialLevel]) -> Vec<CheckRecord> {
    let id = |s: &str| format!("{prefix}.{s}");
    let with_fb: Vec<&PartialLevel> = levels.iter().filter(|l| l.multiplicity.is_some()).collect();
    let mut out = vec![
        CheckRecord::new(
            &id("certified"),
            "partial transport: optimal plan",
            levels.iter().all(|l| l.certified),
            json!(levels.iter().map(|l| l.certified).collect::<Vec<_>>()),
            json!(true),
        ),
        CheckRecord::new(
            &id("interior_ball"),
            "partial transport: interior ball property",
            levels.iter().all(|l| l.interior_ball_violations == 0),
            json!(levels.iter().map(|l| l.interior_ball_violations).collect::<Vec<_>>()),
            json!(0),
        ),
        CheckRecord::new(
            &id("stay_put"),
            "partial transport: untransported mass stays put",
            levels.iter().all(|l| l.stay_put_residual <= 1e-9),
            json!(levels.iter().map(|l| num(l.stay_put_residual)).collect::<Vec<_>>()),
            num(1e-9),
        ),
    ];
    if !with_fb.is_empty() {
        out.push(CheckRecord::new(
            &id("graph_over_l"),
            "partial transport: free boundary is a graph over the separating line",
            with_fb.iter().all(|l| l.multiplicity == Some(1)),
            json!(with_fb.iter().map(|l| l.multiplicity).collect::<Vec<_>>()),
            json!(1),
        ));
        out.push(CheckRecord::new(
            &id("fb_points"),
            "partial transport: free boundary smooth except finitely many points",
            with_fb.iter().all(|l| l.f1_clusters <= l.f1_bound && l.f2_clusters <= l.f2_bound),
            json!(with_fb.iter().map(|l| [l.f1_clusters, l.f2_clusters]).collect::<Vec<_>>()),
            json!([with_fb[0].f1_bound, with_fb[0].f2_bound]),
        ));
    }
    let errs: Vec<f64> = with_fb.iter().filter_map(|l| l.fb_normal_error).collect();
    if errs.len() >= 2 {
        out.push(CheckRecord::new(
            &id("fb_normal"),
            "partial transport: free boundary normal is the transport direction",
            errs.iter().all(|e| e.is_finite()) && errs.windows(2).all(|w| w[1] < w[0]),
            json!(errs.iter().map(|&e| num(e)).collect::<Vec<_>>()),
            json!("strictly decreasing"),
        ));
    }
    out
}

#[derive(Serialize)]
struct PartialOut<'a> {
    transform: RigidTransform,
    mass: f64,
    active_source: &'a [usize],
    active_target: &'a [usize],
    source_samples: &'a [Point2],
    target_samples: &'a [Point2],
    couplings: &'a [(usize, usize, f64)],
    free_boundary: Option<&'a polyot::partial::FreeBoundary>,
    fb_classes: &'a [FbClass],
    levels: &'a [PartialLevel],
}

pub fn cmd_partial(cfg: &RunConfig) -> Result<Report, CliError> {
    let path = cfg.problem()?;
    let file: PartialProblemFile = read_json(path)?;
    let mass = cfg
        .mass
        .or(file.mass)
        .ok_or_else(|| CliError::Input(format!("{}: no mass given (use --mass)", path.display())))?;
    let n = cfg.n_sites.or(file.n).unwrap_or(DEFAULT_N);
    let seed = cfg.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let problem = PartialProblem::new(file.source, file.target, mass).map_err(partial_error)?;
    let mut levels = Vec::new();
    let mut last: Option<PartialSolution> = None;
    for nk in refinement(n, cfg.refinement_levels) {
        let sol = solve_partial(&problem, nk, seed).map_err(partial_error)?;
        levels.push(partial_level(nk, &sol));
        last = Some(sol);
    }
    let sol = last.expect("one level");
    let mut report = Report::new("partial", EnvStamp::new(seed, n));
    for c in partial_checks("partial", &levels) {
        report.push(c);
    }
    let full = mass >= problem.available_mass() * (1.0 - 1e-9);
    let mut details = json!({ "levels": levels });
    if sol.free_boundary.is_none() {
        details["free_boundary"] = json!("empty");
    }
    if full {
        if let Some(c) = complete_consistency(&problem, &sol, n, seed)? {
            report.push(c);
        }
    }
    report.details = details;
    write_json(
        &cfg.out("partial.json"),
        &PartialOut {
            transform: sol.transform,
            mass,
            active_source: &sol.active_source,
            active_target: &sol.active_target,
            source_samples: &sol.plan.source_samples,
            target_samples: &sol.plan.target_samples,
            couplings: &sol.plan.couplings,
            free_boundary: sol.free_boundary.as_ref(),
            fb_classes: &sol.fb_classes,
            levels: &levels,
        },
    )?;
    write_text(&cfg.out("partial.svg"), &svg::partial_svg(&sol, 200))?;
    forced(&mut report, cfg);
    finish(report, cfg)
}

/// At full mass between domains of equal area the partial plan is a complete
/// plan; compare its cost with the semi-discrete one.
fn complete_consistency(
    problem: &PartialProblem,
    sol: &PartialSolution,
    n: usize,
    seed: u64,
) -> Result<Option<CheckRecord>, CliError> {
    let (sa, ta) = (problem.source.area(), problem.target.area());
    if (sa - ta).abs() > 1e-9 * sa || !problem.source.is_convex() {
        return Ok(None);
    }
    let prob = SemiDiscreteProblem::sampled(problem.source.clone(), problem.target.clone(), n, seed, 0).map_err(ot_error)?;
    let complete = solve(&prob, &NewtonOptions::default()).map_err(ot_error)?;
    let (a, b) = (sol.plan.cost(), transport_cost(&complete));
    let rel = (a - b).abs() / b.max(1e-300);
    let tol = 0.05;
    Ok(Some(CheckRecord::new(
        "partial.complete_consistency",
        "partial transport at full mass is complete transport",
        rel <= tol,
        json!({"partial_cost": num(a), "complete_cost": num(b), "relative": num(rel)}),
        num(tol),
    )))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = verify::run(cfg);
    forced(&mut report, cfg);
    finish(report, cfg)
}
