//! Power diagrams clipped to a convex source.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::OtError;
use crate::geometry::{ConvexPolygon, EdgeLabel, LabeledPolygon, Point2, Polygon, Segment};
use crate::potential::{build_cell, MaxAffineIndex};

/// Relative edge length (w.r.t. the source diameter) below which two cells
/// are not reported as adjacent.
pub const ADJACENCY_REL_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adjacency {
    pub i: usize,
    pub j: usize,
    pub edge: Segment,
}

/// Cell `j` is `{x in source : x . y_j - w_j >= x . y_k - w_k for all k}`.
#[derive(Clone, Debug)]
pub struct LaguerreDiagram {
    pub sites: Vec<Point2>,
    pub weights: Vec<f64>,
    pub cells: Vec<ConvexPolygon>,
    /// Shared edges longer than `ADJACENCY_REL_TOL * diam(source)`, with `i < j`.
    pub adjacency: Vec<Adjacency>,
    labels: Vec<Vec<EdgeLabel>>,
    source: Polygon,
}

pub(crate) fn check_distinct(sites: &[Point2]) -> Result<(), OtError> {
    let mut order: Vec<usize> = (0..sites.len()).collect();
    order.sort_by(|&a, &b| sites[a].x.total_cmp(&sites[b].x).then(sites[a].y.total_cmp(&sites[b].y)));
    for w in order.windows(2) {
        if sites[w[0]] == sites[w[1]] {
            return Err(OtError::DuplicateSites(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(())
}

impl LaguerreDiagram {
    pub fn source(&self) -> &Polygon {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Edge labels of `cells[k]`: edge `e` runs from vertex `e` to `e + 1`.
    pub fn cell_labels(&self, k: usize) -> &[EdgeLabel] {
        &self.labels[k]
    }

    /// Neighbouring cells of `k` (any positive shared length).
    pub fn neighbors(&self, k: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.labels[k]
            .iter()
            .filter_map(|l| match l {
                EdgeLabel::Piece(j) => Some(*j as usize),
                EdgeLabel::Boundary(_) => None,
            })
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Every shared edge keyed by `(i, j)` with `i < j`, lengths taken as the
    /// larger of the two sides' versions.
    pub fn all_edges(&self) -> BTreeMap<(usize, usize), Segment> {
        let mut out: BTreeMap<(usize, usize), Segment> = BTreeMap::new();
        for k in 0..self.cells.len() {
            let v = self.cells[k].vertices();
            let n = v.len();
            if n < 2 {
                continue;
            }
            for (e, l) in self.labels[k].iter().enumerate() {
                if let EdgeLabel::Piece(j) = *l {
                    let j = j as usize;
                    let seg = Segment::new(v[e], v[(e + 1) % n]);
                    let key = (k.min(j), k.max(j));
                    if out.get(&key).is_none_or(|s| seg.length() > s.length()) {
                        out.insert(key, seg);
                    }
                }
            }
        }
        out
    }

    pub fn masses(&self) -> Vec<f64> {
        cell_masses(self)
    }

    pub fn potential_pieces(&self) -> (Vec<Point2>, Vec<f64>) {
        (self.sites.clone(), self.weights.iter().map(|w| -w).collect())
    }
}

fn source_domain(source: &Polygon) -> Result<ConvexPolygon, OtError> {
    source.as_convex().ok_or(OtError::NonConvexSource)
}

/// Builds the diagram; `hints[k]` (if given) lists likely neighbours of cell `k`.
pub fn build_laguerre_with_hints(
    sites: &[Point2],
    weights: &[f64],
    source: &Polygon,
    hints: Option<&[Vec<usize>]>,
) -> Result<LaguerreDiagram, OtError> {
    assert_eq!(sites.len(), weights.len());
    if sites.is_empty() {
        return Err(OtError::InvalidProblem("no sites".into()));
    }
    check_distinct(sites)?;
    let dom = LabeledPolygon::from_convex(&source_domain(source)?);
    let c: Vec<f64> = weights.iter().map(|w| -w).collect();
    let idx = MaxAffineIndex::new(sites, &c);
    let built: Vec<LabeledPolygon> = (0..sites.len())
        .into_par_iter()
        .map(|k| {
            let h: &[usize] = hints.map(|h| h[k].as_slice()).unwrap_or(&[]);
            build_cell(&idx, k, &dom, h)
        })
        .collect();
    let mut cells = Vec::with_capacity(built.len());
    let mut labels = Vec::with_capacity(built.len());
    for lp in built {
        labels.push(lp.labels.clone());
        cells.push(lp.to_convex());
    }
    let mut d = LaguerreDiagram {
        sites: sites.to_vec(),
        weights: weights.to_vec(),
        cells,
        adjacency: Vec::new(),
        labels,
        source: source.clone(),
    };
    let min_len = ADJACENCY_REL_TOL * source.diameter();
    d.adjacency = d
        .all_edges()
        .into_iter()
        .filter(|(_, s)| s.length() > min_len)
        .map(|((i, j), edge)| Adjacency { i, j, edge })
        .collect();
    Ok(d)
}

/// Power diagram of `sites` with `weights`, clipped to a convex `source`.
pub fn build_laguerre(sites: &[Point2], weights: &[f64], source: &Polygon) -> Result<LaguerreDiagram, OtError> {
    build_laguerre_with_hints(sites, weights, source, None)
}

pub fn cell_masses(diag: &LaguerreDiagram) -> Vec<f64> {
    diag.cells.iter().map(|c| c.area()).collect()
}
