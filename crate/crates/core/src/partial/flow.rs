//! Successive shortest paths on the bipartite partial-transport network, with
//! Dijkstra on reduced costs stopped once the sink is settled.
//!
//! Large instances run on a sparse set of candidate arcs predicted from a
//! coarser solve; the potentials are then checked against every arc of the
//! dense network and violating arcs are added until none remain, so the
//! result is optimal for the dense problem.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rayon::prelude::*;

use super::plan::{integer_instance, IntegerInstance};
use crate::geometry::Point2;

/// Optimal integer flow with its node potentials.
#[derive(Clone, Debug)]
pub struct FlowResult {
    /// `(i, j, units)` with positive flow.
    pub flow: Vec<(usize, usize, i64)>,
    /// Potentials of the sources and targets; the super source has potential 0.
    pub source_pot: Vec<i64>,
    pub target_pot: Vec<i64>,
    pub sink_pot: i64,
    /// Every arc of the dense residual network has non-negative reduced cost.
    pub certified: bool,
    pub augmentations: usize,
    /// Source rows relaxed over all Dijkstra runs.
    pub row_scans: usize,
    /// Sparse solves needed before the dense check passed.
    pub rounds: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Via {
    None,
    FromSource,
    Forward(usize),
    Backward(usize),
    ToSink(usize),
}

/// Instances with more arcs than this are solved on candidate arcs.
const DENSE_LIMIT: usize = 250_000;
const CANDIDATES: usize = 16;
const COARSE_STRIDE: usize = 4;

pub fn min_cost_flow(inst: &IntegerInstance, sources: &[Point2], targets: &[Point2]) -> FlowResult {
    let (ns, nt) = (sources.len(), targets.len());
    let mut cand: Vec<Vec<u32>> = if ns * nt <= DENSE_LIMIT {
        vec![(0..nt as u32).collect(); ns]
    } else {
        predicted_candidates(inst, sources, targets)
    };
    let mut rounds = 0;
    loop {
        rounds += 1;
        let Some(mut res) = ssp(inst, sources, targets, &cand) else {
            // too sparse to route the mass: widen every list
            for (i, c) in cand.iter_mut().enumerate() {
                let mut wide = nearest(targets, sources[i], (2 * c.len()).min(nt));
                wide.extend(c.iter());
                wide.sort_unstable();
                wide.dedup();
                *c = wide;
            }
            continue;
        };
        let bad = dense_violations(inst, sources, targets, &res);
        if bad.iter().all(|b| b.is_empty()) {
            res.rounds = rounds;
            return res;
        }
        for (c, b) in cand.iter_mut().zip(bad) {
            c.extend(b);
            c.sort_unstable();
            c.dedup();
        }
    }
}

/// Targets `j` with `c(i, j) + ps[i] - pt[j] < 0`, per source.
fn dense_violations(inst: &IntegerInstance, sources: &[Point2], targets: &[Point2], res: &FlowResult) -> Vec<Vec<u32>> {
    sources
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            (0..targets.len())
                .filter(|&j| inst.cost(x, targets[j]) + res.source_pot[i] - res.target_pot[j] < 0)
                .map(|j| j as u32)
                .collect()
        })
        .collect()
}

fn nearest(points: &[Point2], p: Point2, k: usize) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..points.len() as u32).collect();
    let key = |j: &u32| (points[*j as usize].dist(p), *j);
    if k < idx.len() {
        idx.select_nth_unstable_by(k, |a, b| key(a).partial_cmp(&key(b)).unwrap());
        idx.truncate(k);
    }
    idx.sort_unstable();
    idx
}

/// Solves a strided subsample with the same total masses, transfers the
/// displacement of the nearest active coarse sample to every fine sample and
/// keeps the arcs to the samples nearest the predicted partner, from both
/// sides.
fn predicted_candidates(inst: &IntegerInstance, sources: &[Point2], targets: &[Point2]) -> Vec<Vec<u32>> {
    let sub = |n: usize| (0..n).step_by(COARSE_STRIDE).collect::<Vec<_>>();
    let (si, ti) = (sub(sources.len()), sub(targets.len()));
    let weights = |units: &[i64], idx: &[usize]| {
        let total: f64 = units.iter().map(|&u| u as f64).sum();
        let part: f64 = idx.iter().map(|&k| units[k] as f64).sum();
        idx.iter()
            .map(|&k| units[k] as f64 * total / part / inst.mass_scale)
            .collect::<Vec<_>>()
    };
    let cs: Vec<Point2> = si.iter().map(|&k| sources[k]).collect();
    let ct: Vec<Point2> = ti.iter().map(|&k| targets[k]).collect();
    let (ca, cb) = (weights(&inst.supply, &si), weights(&inst.demand, &ti));
    let m = inst.flow as f64 / inst.mass_scale;
    let m = m.min(ca.iter().sum::<f64>()).min(cb.iter().sum::<f64>());
    let cinst = integer_instance(&cs, &ca, &ct, &cb, m);
    let coarse = min_cost_flow(&cinst, &cs, &ct);
    let mut fwd = vec![(Point2::ZERO, 0i64); cs.len()];
    let mut bwd = vec![(Point2::ZERO, 0i64); ct.len()];
    for &(i, j, f) in &coarse.flow {
        let d = ct[j] - cs[i];
        fwd[i].0 += d * f as f64;
        fwd[i].1 += f;
        bwd[j].0 += d * f as f64;
        bwd[j].1 += f;
    }
    // position and mean displacement of each active coarse sample
    let active = |acc: &[(Point2, i64)], pts: &[Point2]| -> Vec<(Point2, Point2)> {
        acc.iter()
            .zip(pts)
            .filter(|(a, _)| a.1 > 0)
            .map(|(a, &p)| (p, a.0 / a.1 as f64))
            .collect()
    };
    let (af, ab) = (active(&fwd, &cs), active(&bwd, &ct));
    let shift = |act: &[(Point2, Point2)], p: Point2| {
        act.iter()
            .min_by(|a, b| a.0.dist(p).total_cmp(&b.0.dist(p)))
            .map_or(Point2::ZERO, |a| a.1)
    };
    let mut cand: Vec<Vec<u32>> = sources
        .par_iter()
        .map(|&x| nearest(targets, x + shift(&af, x), CANDIDATES))
        .collect();
    let back: Vec<Vec<u32>> = targets
        .par_iter()
        .map(|&y| nearest(sources, y - shift(&ab, y), CANDIDATES))
        .collect();
    for (j, b) in back.iter().enumerate() {
        for &i in b {
            cand[i as usize].push(j as u32);
        }
    }
    for c in &mut cand {
        c.sort_unstable();
        c.dedup();
    }
    cand
}

/// Successive shortest paths restricted to the arcs `i -> cand[i]`; `None`
/// if the mass cannot be routed on them.
fn ssp(inst: &IntegerInstance, sources: &[Point2], targets: &[Point2], cand: &[Vec<u32>]) -> Option<FlowResult> {
    let (ns, nt) = (sources.len(), targets.len());
    let c = |i: usize, j: usize| inst.cost(sources[i], targets[j]);
    let rows: Vec<Vec<(u32, i64)>> = cand
        .par_iter()
        .enumerate()
        .map(|(i, js)| js.iter().map(|&j| (j, c(i, j as usize))).collect())
        .collect();
    // candidate sources of each target by increasing cost
    let mut order: Vec<Vec<(i64, u32)>> = vec![Vec::new(); nt];
    for (i, r) in rows.iter().enumerate() {
        for &(j, w) in r {
            order[j as usize].push((w, i as u32));
        }
    }
    for o in &mut order {
        o.sort_unstable();
    }
    let mut next = vec![0usize; nt];
    let mut supply = inst.supply.clone();
    let mut demand = inst.demand.clone();
    // flow on (i, j), indexed by target then source
    let mut back: Vec<BTreeMap<usize, i64>> = vec![BTreeMap::new(); nt];
    let mut ps = vec![0i64; ns];
    let mut pt = vec![0i64; nt];
    let mut p_sink = 0i64;
    let inf = i64::MAX / 4;
    let mut sent = 0i64;
    let mut augmentations = 0;
    let mut row_scans = 0;
    // nodes: sources 0..ns, targets ns..ns+nt, sink ns+nt; the super source is implicit
    let nn = ns + nt + 1;
    let sink = ns + nt;
    let mut dist = vec![inf; nn];
    let mut via = vec![Via::None; nn];
    let mut done = vec![false; nn];
    while sent < inst.flow {
        dist.fill(inf);
        via.fill(Via::None);
        done.fill(false);
        // sources with supply left sit at distance 0 with potential 0; seed
        // each target from the cheapest of them instead of relaxing them all
        let mut heap = BinaryHeap::with_capacity(2 * nt);
        for i in 0..ns {
            if supply[i] > 0 {
                debug_assert_eq!(ps[i], 0);
                dist[i] = 0;
                via[i] = Via::FromSource;
                done[i] = true;
            }
        }
        for j in 0..nt {
            let ord = &order[j];
            while next[j] < ord.len() && supply[ord[next[j]].1 as usize] == 0 {
                next[j] += 1;
            }
            if let Some(&(w, i)) = ord.get(next[j]) {
                dist[ns + j] = w - pt[j];
                via[ns + j] = Via::Forward(i as usize);
                heap.push(Reverse((dist[ns + j], ns + j)));
            }
        }
        while let Some(Reverse((dv, v))) = heap.pop() {
            if done[v] || dv > dist[v] {
                continue;
            }
            done[v] = true;
            if v == sink {
                break;
            }
            if v < ns {
                let i = v;
                row_scans += 1;
                for &(j, w) in &rows[i] {
                    let t = ns + j as usize;
                    let nd = dv + w + ps[i] - pt[j as usize];
                    if nd < dist[t] && !done[t] {
                        dist[t] = nd;
                        via[t] = Via::Forward(i);
                        heap.push(Reverse((nd, t)));
                    }
                }
            } else {
                let j = v - ns;
                if demand[j] > 0 {
                    let nd = dv + pt[j] - p_sink;
                    if nd < dist[sink] {
                        dist[sink] = nd;
                        via[sink] = Via::ToSink(j);
                        heap.push(Reverse((nd, sink)));
                    }
                }
                for &i in back[j].keys() {
                    let nd = dv - c(i, j) + pt[j] - ps[i];
                    if nd < dist[i] && !done[i] {
                        dist[i] = nd;
                        via[i] = Via::Backward(j);
                        heap.push(Reverse((nd, i)));
                    }
                }
            }
        }
        let dt = dist[sink];
        if dt >= inf {
            return None;
        }
        for i in 0..ns {
            ps[i] += dist[i].min(dt);
        }
        for j in 0..nt {
            pt[j] += dist[ns + j].min(dt);
        }
        p_sink += dt;
        // walk back from the sink
        let mut path = Vec::new();
        let mut v = sink;
        loop {
            let step = via[v];
            path.push((v, step));
            v = match step {
                Via::ToSink(j) => ns + j,
                Via::Forward(i) => i,
                Via::Backward(j) => ns + j,
                Via::FromSource => break,
                Via::None => unreachable!(),
            };
        }
        let mut push = inst.flow - sent;
        for &(v, step) in &path {
            match step {
                Via::ToSink(j) => push = push.min(demand[j]),
                Via::Backward(j) => push = push.min(back[j][&v]),
                Via::FromSource => push = push.min(supply[v]),
                _ => {}
            }
        }
        for &(v, step) in &path {
            match step {
                Via::ToSink(j) => demand[j] -= push,
                Via::Forward(i) => *back[v - ns].entry(i).or_insert(0) += push,
                Via::Backward(j) => {
                    let f = back[j].get_mut(&v).unwrap();
                    *f -= push;
                    if *f == 0 {
                        back[j].remove(&v);
                    }
                }
                Via::FromSource => supply[v] -= push,
                Via::None => {}
            }
        }
        sent += push;
        augmentations += 1;
    }
    // residual arcs at the super source, the sink and the flow-carrying
    // pairs; forward pair arcs are left to the dense check
    let mut certified = true;
    for i in 0..ns {
        if (supply[i] > 0 && -ps[i] < 0) || (supply[i] < inst.supply[i] && ps[i] < 0) {
            certified = false;
        }
    }
    for j in 0..nt {
        if (demand[j] > 0 && pt[j] - p_sink < 0) || (demand[j] < inst.demand[j] && p_sink - pt[j] < 0) {
            certified = false;
        }
        if back[j].keys().any(|&i| -c(i, j) + pt[j] - ps[i] < 0) {
            certified = false;
        }
    }
    let mut flow = Vec::new();
    for (j, m) in back.iter().enumerate() {
        for (&i, &f) in m {
            flow.push((i, j, f));
        }
    }
    flow.sort_unstable();
    Some(FlowResult {
        flow,
        source_pot: ps,
        target_pot: pt,
        sink_pot: p_sink,
        certified,
        augmentations,
        row_scans,
        rounds: 1,
    })
}
