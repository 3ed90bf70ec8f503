use std::collections::VecDeque;

use super::OracleError;
use crate::geometry::Point2;
use crate::partial::{integer_instance, DiscretePlan};

struct Edge {
    to: usize,
    cap: i64,
    cost: i64,
}

struct Graph {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    fn new(n: usize) -> Self {
        Graph {
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add(&mut self, a: usize, b: usize, cap: i64, cost: i64) -> usize {
        let k = self.edges.len();
        self.edges.push(Edge { to: b, cap, cost });
        self.edges.push(Edge { to: a, cap: 0, cost: -cost });
        self.adj[a].push(k);
        self.adj[b].push(k + 1);
        k
    }

    /// Queue-based Bellman-Ford from `s`; returns the incoming edge of each node on a shortest path.
    fn shortest_paths(&self, s: usize) -> Vec<Option<usize>> {
        let n = self.adj.len();
        let mut dist = vec![i64::MAX; n];
        let mut prev = vec![None; n];
        let mut queued = vec![false; n];
        let mut q = VecDeque::from([s]);
        dist[s] = 0;
        queued[s] = true;
        while let Some(v) = q.pop_front() {
            queued[v] = false;
            for &e in &self.adj[v] {
                let ed = &self.edges[e];
                if ed.cap > 0 && dist[v] + ed.cost < dist[ed.to] {
                    dist[ed.to] = dist[v] + ed.cost;
                    prev[ed.to] = Some(e);
                    if !queued[ed.to] {
                        queued[ed.to] = true;
                        q.push_back(ed.to);
                    }
                }
            }
        }
        prev
    }
}

/// Optimal plan moving exactly `m` from weighted sources to weighted targets
/// with at most the given mass leaving or entering each sample (successive
/// shortest paths with Bellman-Ford, integer arithmetic).
pub fn partial_flow_solve(
    sources: &[Point2],
    a: &[f64],
    targets: &[Point2],
    b: &[f64],
    m: f64,
) -> Result<DiscretePlan, OracleError> {
    assert_eq!(sources.len(), a.len());
    assert_eq!(targets.len(), b.len());
    let available = a.iter().sum::<f64>().min(b.iter().sum::<f64>());
    if !(m >= 0.0) || m > available * (1.0 + 1e-12) {
        return Err(OracleError::InfeasibleMass { mass: m, available });
    }
    let inst = integer_instance(sources, a, targets, b, m);
    let (ns, nt) = (sources.len(), targets.len());
    let s = 0;
    let t = ns + nt + 1;
    let mut g = Graph::new(ns + nt + 2);
    for i in 0..ns {
        g.add(s, 1 + i, inst.supply[i], 0);
    }
    let inf = i64::MAX / 4;
    let mut pair_edges = Vec::with_capacity(ns * nt);
    for i in 0..ns {
        for j in 0..nt {
            let e = g.add(1 + i, 1 + ns + j, inf, inst.cost(sources[i], targets[j]));
            pair_edges.push((i, j, e));
        }
    }
    for j in 0..nt {
        g.add(1 + ns + j, t, inst.demand[j], 0);
    }
    let mut sent = 0i64;
    while sent < inst.flow {
        let prev = g.shortest_paths(s);
        if prev[t].is_none() {
            return Err(OracleError::InfeasibleMass { mass: m, available });
        }
        let mut push = inst.flow - sent;
        let mut v = t;
        while let Some(e) = prev[v] {
            push = push.min(g.edges[e].cap);
            v = g.edges[e ^ 1].to;
        }
        let mut v = t;
        while let Some(e) = prev[v] {
            g.edges[e].cap -= push;
            g.edges[e ^ 1].cap += push;
            v = g.edges[e ^ 1].to;
        }
        sent += push;
    }
    let couplings = pair_edges
        .into_iter()
        .filter_map(|(i, j, e)| {
            let f = g.edges[e ^ 1].cap;
            (f > 0).then(|| (i, j, f as f64 / inst.mass_scale))
        })
        .collect();
    Ok(DiscretePlan {
        source_samples: sources.to_vec(),
        source_weights: a.to_vec(),
        target_samples: targets.to_vec(),
        target_weights: b.to_vec(),
        couplings,
    })
}
