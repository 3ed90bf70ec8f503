//! Singular edges, the graph they form, and its decomposition into chains.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{segment_exits, ConvexPolygon, Point2, Polygon, Segment};
use crate::otsolve::{LaguerreDiagram, ADJACENCY_REL_TOL};

/// A Laguerre edge whose dual segment leaves the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularEdge {
    /// `(i, j)` with `i < j`.
    pub cell_pair: (usize, usize),
    pub edge: Segment,
    /// From `y_i` to `y_j`.
    pub dual: Segment,
    /// `(y_j - y_i) / |y_j - y_i|`.
    pub normal: Point2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularNode {
    pub position: Point2,
    /// Incident singular edges.
    pub edges: Vec<usize>,
    /// Cells having this point as a vertex.
    pub cells: Vec<usize>,
    /// Convex hull of the sites of `cells`.
    pub dual_hull: ConvexPolygon,
    pub on_source_boundary: bool,
}

impl SingularNode {
    pub fn degree(&self) -> usize {
        self.edges.len()
    }
}

/// A maximal path through degree-2 nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub edges: Vec<usize>,
    /// `edges.len() + 1` nodes, or `edges.len()` for a closed loop.
    pub nodes: Vec<usize>,
    pub closed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularGraph {
    pub edges: Vec<SingularEdge>,
    pub nodes: Vec<SingularNode>,
    /// Node indices `(a, b)` of each edge.
    pub edge_nodes: Vec<(usize, usize)>,
    pub chains: Vec<Chain>,
}

/// Adjacency edges whose open dual segment exits `target`.
pub fn detect_singular_edges(diag: &LaguerreDiagram, target: &Polygon, tol: f64) -> Vec<SingularEdge> {
    diag.adjacency
        .par_iter()
        .filter_map(|a| {
            let dual = Segment::new(diag.sites[a.i], diag.sites[a.j]);
            match segment_exits(target, &dual, tol) {
                Ok(true) => Some(SingularEdge {
                    cell_pair: (a.i, a.j),
                    edge: a.edge,
                    dual,
                    normal: dual.direction().normalized().unwrap_or(Point2::ZERO),
                }),
                _ => None,
            }
        })
        .collect()
}

/// Assigns each point to a representative within `radius` (first come).
struct PointMerger {
    radius: f64,
    grid: BTreeMap<(i64, i64), Vec<usize>>,
    points: Vec<Point2>,
}

impl PointMerger {
    fn new(radius: f64) -> Self {
        PointMerger {
            radius,
            grid: BTreeMap::new(),
            points: Vec::new(),
        }
    }

    fn key(&self, p: Point2) -> (i64, i64) {
        ((p.x / self.radius).floor() as i64, (p.y / self.radius).floor() as i64)
    }

    fn find(&self, p: Point2) -> Option<usize> {
        let (kx, ky) = self.key(p);
        let mut best: Option<(usize, f64)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = self.grid.get(&(kx + dx, ky + dy)) {
                    for &i in v {
                        let d = self.points[i].dist(p);
                        if d <= self.radius && best.is_none_or(|b| d < b.1) {
                            best = Some((i, d));
                        }
                    }
                }
            }
        }
        best.map(|b| b.0)
    }

    fn insert(&mut self, p: Point2) -> usize {
        if let Some(i) = self.find(p) {
            return i;
        }
        let k = self.key(p);
        self.grid.entry(k).or_default().push(self.points.len());
        self.points.push(p);
        self.points.len() - 1
    }
}

/// Builds nodes (merging endpoints closer than the adjacency tolerance) and chains.
pub fn build_graph(diag: &LaguerreDiagram, edges: Vec<SingularEdge>) -> SingularGraph {
    let source = diag.source();
    let radius = 2.0 * ADJACENCY_REL_TOL * source.diameter();
    let mut merger = PointMerger::new(radius);
    let mut edge_nodes = Vec::with_capacity(edges.len());
    for e in &edges {
        let a = merger.insert(e.edge.a);
        let b = merger.insert(e.edge.b);
        edge_nodes.push((a, b));
    }
    let n = merger.points.len();
    let mut inc: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, &(a, b)) in edge_nodes.iter().enumerate() {
        inc[a].push(k);
        if b != a {
            inc[b].push(k);
        }
    }
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, cell) in diag.cells.iter().enumerate() {
        for &v in cell.vertices() {
            if let Some(i) = merger.find(v) {
                cells[i].push(k);
            }
        }
    }
    let bdry_tol = radius;
    let nodes: Vec<SingularNode> = (0..n)
        .map(|i| {
            let mut c = std::mem::take(&mut cells[i]);
            for &e in &inc[i] {
                c.push(edges[e].cell_pair.0);
                c.push(edges[e].cell_pair.1);
            }
            c.sort_unstable();
            c.dedup();
            let sites: Vec<Point2> = c.iter().map(|&k| diag.sites[k]).collect();
            let p = merger.points[i];
            SingularNode {
                position: p,
                edges: inc[i].clone(),
                dual_hull: ConvexPolygon::hull(&sites),
                cells: c,
                on_source_boundary: source.distance_to_boundary(p) <= bdry_tol,
            }
        })
        .collect();
    let chains = chain_edges(&edge_nodes, &nodes.iter().map(|n| n.edges.clone()).collect::<Vec<_>>());
    SingularGraph {
        edges,
        nodes,
        edge_nodes,
        chains,
    }
}

/// Splits the edge set into maximal paths whose interior nodes have degree 2.
pub fn chain_edges(edge_nodes: &[(usize, usize)], incidence: &[Vec<usize>]) -> Vec<Chain> {
    let m = edge_nodes.len();
    let mut used = vec![false; m];
    let mut chains = Vec::new();
    let other = |e: usize, v: usize| {
        let (a, b) = edge_nodes[e];
        if a == v {
            b
        } else {
            a
        }
    };
    let walk = |start_edge: usize, from: usize, used: &mut Vec<bool>| -> (Vec<usize>, Vec<usize>) {
        // walk away from `from` through `start_edge`
        let mut es = vec![start_edge];
        let mut vs = vec![from];
        let mut v = other(start_edge, from);
        let mut e = start_edge;
        loop {
            vs.push(v);
            if incidence[v].len() != 2 {
                break;
            }
            let next = if incidence[v][0] == e { incidence[v][1] } else { incidence[v][0] };
            if used[next] {
                break;
            }
            used[next] = true;
            es.push(next);
            e = next;
            v = other(next, v);
        }
        (es, vs)
    };
    // open chains start at nodes of degree != 2
    for v in 0..incidence.len() {
        if incidence[v].len() == 2 {
            continue;
        }
        for &e in &incidence[v] {
            if used[e] {
                continue;
            }
            used[e] = true;
            let (es, vs) = walk(e, v, &mut used);
            chains.push(Chain {
                edges: es,
                nodes: vs,
                closed: false,
            });
        }
    }
    // the rest are loops through degree-2 nodes
    for e in 0..m {
        if used[e] {
            continue;
        }
        used[e] = true;
        let start = edge_nodes[e].0;
        let (es, mut vs) = walk(e, start, &mut used);
        if vs.last() == Some(&start) && vs.len() > 1 {
            vs.pop();
        }
        chains.push(Chain {
            edges: es,
            nodes: vs,
            closed: true,
        });
    }
    chains
}

#[cfg(test)]
mod tests {
    use super::*;

    fn incidence(n: usize, en: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); n];
        for (k, &(a, b)) in en.iter().enumerate() {
            inc[a].push(k);
            inc[b].push(k);
        }
        inc
    }

    #[test]
    fn single_edge() {
        let en = [(0, 1)];
        let c = chain_edges(&en, &incidence(2, &en));
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].edges, vec![0]);
    }

    #[test]
    fn path_of_five() {
        let en = [(2, 3), (0, 1), (4, 5), (1, 2), (3, 4)];
        let c = chain_edges(&en, &incidence(6, &en));
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].edges.len(), 5);
        assert_eq!(c[0].nodes, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn y_configuration() {
        let en = [(0, 1), (0, 2), (0, 3)];
        let c = chain_edges(&en, &incidence(4, &en));
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|ch| ch.edges.len() == 1 && ch.nodes[0] == 0));
    }

    #[test]
    fn loop_is_one_closed_chain() {
        let en = [(0, 1), (1, 2), (2, 0)];
        let c = chain_edges(&en, &incidence(3, &en));
        assert_eq!(c.len(), 1);
        assert!(c[0].closed);
        assert_eq!(c[0].edges.len(), 3);
        assert_eq!(c[0].nodes.len(), 3);
    }
}
