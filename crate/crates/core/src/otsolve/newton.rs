//! Damped Newton ascent on the semi-discrete Kantorovich dual.

use super::laguerre::{build_laguerre_with_hints, LaguerreDiagram};
use super::linalg::Laplacian;
use super::{OtError, SemiDiscreteProblem};

#[derive(Clone, Debug)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Smallest accepted step length.
    pub step_floor: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-7,
            max_iters: 200,
            step_floor: (2.0f64).powi(-30),
        }
    }
}

#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub residual: f64,
    pub dual: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub weights: Vec<f64>,
    pub diagram: LaguerreDiagram,
    /// `max_j |mass_j - lambda_j| / area(source)` at the returned weights.
    pub residual: f64,
    pub iters: usize,
    pub history: Vec<IterationRecord>,
}

/// `-∫ u - Σ λ_j w_j`, concave in the weights, with `u(x) = max_j x . y_j - w_j`.
pub fn dual_objective(diag: &LaguerreDiagram, masses: &[f64]) -> f64 {
    let mut integral = 0.0;
    for (k, cell) in diag.cells.iter().enumerate() {
        let a = cell.area();
        if a > 0.0 {
            integral += a * (cell.centroid().dot(diag.sites[k]) - diag.weights[k]);
        }
    }
    let lw: f64 = masses.iter().zip(&diag.weights).map(|(l, w)| l * w).sum();
    -integral - lw
}

/// Gradient of [`dual_objective`]: cell masses minus prescribed masses.
pub fn dual_gradient(diag: &LaguerreDiagram, masses: &[f64]) -> Vec<f64> {
    diag.cells.iter().zip(masses).map(|(c, l)| c.area() - l).collect()
}

fn hessian(diag: &LaguerreDiagram) -> Laplacian {
    let edges: Vec<(usize, usize, f64)> = diag
        .all_edges()
        .into_iter()
        .map(|((i, j), s)| (i, j, s.length() / diag.sites[i].dist(diag.sites[j])))
        .collect();
    Laplacian::new(diag.len(), &edges)
}

fn hints(diag: &LaguerreDiagram) -> Vec<Vec<usize>> {
    (0..diag.len()).map(|k| diag.neighbors(k)).collect()
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn gauge(w: &mut [f64]) {
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    for x in w.iter_mut() {
        *x -= mean;
    }
}

/// Starting weights: `|y_j|^2 / 2` (the Voronoi diagram of the sites) if
/// every cell is nonempty, otherwise the weights whose diagram is the Voronoi
/// diagram of the sites mapped affinely onto the source bounding box.
pub fn initial_weights(problem: &SemiDiscreteProblem) -> Result<Vec<f64>, OtError> {
    let mut voronoi: Vec<f64> = problem.sites.iter().map(|y| 0.5 * y.norm2()).collect();
    gauge(&mut voronoi);
    let d = build_laguerre_with_hints(&problem.sites, &voronoi, &problem.source, None)?;
    if d.cells.iter().all(|c| c.area() > 0.0) {
        return Ok(voronoi);
    }
    log::debug!("Voronoi weights leave empty cells; rescaling sites into the source");
    let (slo, shi) = problem.source.bbox();
    let mut tlo = problem.sites[0];
    let mut thi = tlo;
    for p in &problem.sites {
        tlo.x = tlo.x.min(p.x);
        tlo.y = tlo.y.min(p.y);
        thi.x = thi.x.max(p.x);
        thi.y = thi.y.max(p.y);
    }
    let span = (thi.x - tlo.x).max(thi.y - tlo.y).max(1e-300);
    let s = 0.9 * (shi.x - slo.x).min(shi.y - slo.y) / span;
    let t = (slo + shi) * 0.5 - (tlo + thi) * (0.5 * s);
    let mut w: Vec<f64> = problem
        .sites
        .iter()
        .map(|&y| {
            let z = y * s + t;
            z.norm2() / (2.0 * s)
        })
        .collect();
    gauge(&mut w);
    Ok(w)
}

/// Damped Newton: solve `L d = m - λ` (one weight pinned), then halve the
/// step until every cell keeps at least half the initial minimum mass, the
/// residual shrinks by the factor `1 - t/2`, and the dual does not decrease.
pub fn solve_weights(problem: &SemiDiscreteProblem, opts: &NewtonOptions) -> Result<SolveReport, OtError> {
    let n = problem.sites.len();
    let area = problem.source.area();
    let lambda = &problem.masses;
    let mut w = initial_weights(problem)?;
    let mut diag = build_laguerre_with_hints(&problem.sites, &w, &problem.source, None)?;
    let mut g = dual_gradient(&diag, lambda);
    let mut dual = dual_objective(&diag, lambda);
    let m0 = min_of(&diag.masses());
    let floor = 0.5 * m0.min(min_of(lambda));
    if !(floor > 0.0) {
        return Err(OtError::EmptyCellUnrecoverable);
    }
    let mut history = vec![IterationRecord {
        residual: sup_norm(&g) / area,
        dual,
        step: 0.0,
    }];
    let mut iters = 0;
    while sup_norm(&g) > opts.tol * area {
        if iters >= opts.max_iters {
            return Err(OtError::NewtonStall {
                iters,
                residual: sup_norm(&g) / area,
            });
        }
        iters += 1;
        if n == 1 {
            break;
        }
        let lap = hessian(&diag);
        let dir = lap
            .solve_pinned(&g, 0, 1e-12, 20 * n + 100)
            .ok_or(OtError::DisconnectedDiagram)?;
        let hint = hints(&diag);
        let gnorm = sup_norm(&g);
        let mut t = 1.0;
        loop {
            let mut trial: Vec<f64> = w.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            gauge(&mut trial);
            let td = build_laguerre_with_hints(&problem.sites, &trial, &problem.source, Some(&hint))?;
            let tm = td.masses();
            if min_of(&tm) >= floor {
                let tg = dual_gradient(&td, lambda);
                let tdual = dual_objective(&td, lambda);
                let tol_dual = 1e-12 * (1.0 + dual.abs());
                if sup_norm(&tg) <= (1.0 - t / 2.0) * gnorm && tdual >= dual - tol_dual {
                    w = trial;
                    diag = td;
                    g = tg;
                    dual = tdual;
                    break;
                }
            }
            t *= 0.5;
            if t < opts.step_floor {
                return Err(OtError::EmptyCellUnrecoverable);
            }
        }
        history.push(IterationRecord {
            residual: sup_norm(&g) / area,
            dual,
            step: t,
        });
        log::debug!("newton iter {iters}: residual {:e} step {t}", sup_norm(&g) / area);
    }
    Ok(SolveReport {
        residual: sup_norm(&g) / area,
        weights: w,
        diagram: diag,
        iters,
        history,
    })
}
