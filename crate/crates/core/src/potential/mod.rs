//! Piecewise-affine convex functions: evaluation, conjugates,
//! subdifferentials, Monge-Ampère measure, centred sections.

mod cells;
mod conjugate;
mod index;
mod section;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;

pub use cells::{build_cell, cells_in_convex, cells_in_polygon, dedup_points};
pub use conjugate::{
    effective_domain, legendre, ma_measure, subdifferential_at, subdivision_vertices, SubdifferentialCell,
};
pub use index::MaxAffineIndex;
pub use section::{centered_section, section_region, CenteredSection, SectionOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PotentialError {
    #[error("a piecewise-affine function needs at least one piece")]
    Empty,
    #[error("non-finite piece coefficient")]
    NonFinite,
    #[error("centroid iteration did not converge in {iters} iterations (offset {offset:e})")]
    NoConvergence { iters: usize, offset: f64 },
    #[error("section reaches the bounding region")]
    SectionUnbounded,
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),
}

/// `x -> gradient . x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineFunc {
    #[serde(rename = "g")]
    pub gradient: Point2,
    #[serde(rename = "c")]
    pub intercept: f64,
}

impl AffineFunc {
    pub fn new(gradient: Point2, intercept: f64) -> Self {
        AffineFunc { gradient, intercept }
    }

    #[inline]
    pub fn eval(&self, x: Point2) -> f64 {
        self.gradient.dot(x) + self.intercept
    }
}

#[derive(Serialize, Deserialize)]
struct PiecesSpec {
    pieces: Vec<AffineFunc>,
}

/// Maximum of finitely many affine functions.
///
/// Piece order is preserved: the piece index identifies e.g. the target site
/// of a Brenier potential. Call [`PiecewiseAffineConvex::pruned`] to drop
/// pieces with repeated gradients.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PiecesSpec", into = "PiecesSpec")]
pub struct PiecewiseAffineConvex {
    pieces: Vec<AffineFunc>,
    grads: Vec<Point2>,
    icpts: Vec<f64>,
    index: OnceLock<MaxAffineIndex>,
}

impl PartialEq for PiecewiseAffineConvex {
    fn eq(&self, o: &Self) -> bool {
        self.pieces == o.pieces
    }
}

impl TryFrom<PiecesSpec> for PiecewiseAffineConvex {
    type Error = PotentialError;
    fn try_from(s: PiecesSpec) -> Result<Self, Self::Error> {
        PiecewiseAffineConvex::new(s.pieces)
    }
}

impl From<PiecewiseAffineConvex> for PiecesSpec {
    fn from(f: PiecewiseAffineConvex) -> Self {
        PiecesSpec { pieces: f.pieces }
    }
}

impl PiecewiseAffineConvex {
    pub fn new(pieces: Vec<AffineFunc>) -> Result<Self, PotentialError> {
        if pieces.is_empty() {
            return Err(PotentialError::Empty);
        }
        if pieces.iter().any(|p| !p.gradient.is_finite() || !p.intercept.is_finite()) {
            return Err(PotentialError::NonFinite);
        }
        Ok(PiecewiseAffineConvex {
            grads: pieces.iter().map(|p| p.gradient).collect(),
            icpts: pieces.iter().map(|p| p.intercept).collect(),
            pieces,
            index: OnceLock::new(),
        })
    }

    pub fn from_parts(gradients: &[Point2], intercepts: &[f64]) -> Result<Self, PotentialError> {
        assert_eq!(gradients.len(), intercepts.len());
        PiecewiseAffineConvex::new(
            gradients
                .iter()
                .zip(intercepts)
                .map(|(&g, &c)| AffineFunc::new(g, c))
                .collect(),
        )
    }

    /// Max of tangent planes of a differentiable convex `f` at the given points.
    pub fn from_tangents(points: &[Point2], f: impl Fn(Point2) -> (f64, Point2)) -> Result<Self, PotentialError> {
        PiecewiseAffineConvex::new(
            points
                .iter()
                .map(|&p| {
                    let (v, g) = f(p);
                    AffineFunc::new(g, v - g.dot(p))
                })
                .collect(),
        )
    }

    pub fn pieces(&self) -> &[AffineFunc] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn gradients(&self) -> &[Point2] {
        &self.grads
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.icpts
    }

    pub fn index(&self) -> &MaxAffineIndex {
        self.index.get_or_init(|| MaxAffineIndex::new(&self.grads, &self.icpts))
    }

    pub fn evaluate(&self, x: Point2) -> f64 {
        self.index().argmax(x).1
    }

    /// Lowest-index maximal piece at `x` and its value.
    pub fn argmax(&self, x: Point2) -> (usize, f64) {
        self.index().argmax(x)
    }

    /// Pieces within `tol * (1 + |f(x)|)` of the maximum at `x`.
    pub fn active(&self, x: Point2, tol: f64) -> Vec<usize> {
        let (_, m) = self.argmax(x);
        self.index().above(x, m - tol * (1.0 + m.abs()))
    }

    pub fn lipschitz(&self) -> f64 {
        self.grads.iter().map(|g| g.norm()).fold(0.0, f64::max)
    }

    /// Drops pieces whose gradient repeats an earlier one, keeping the
    /// largest intercept at the position of the first occurrence.
    pub fn pruned(&self) -> PiecewiseAffineConvex {
        let mut pos: std::collections::BTreeMap<(u64, u64), usize> = Default::default();
        let mut out: Vec<AffineFunc> = Vec::new();
        for p in &self.pieces {
            let key = ((p.gradient.x + 0.0).to_bits(), (p.gradient.y + 0.0).to_bits());
            match pos.get(&key) {
                Some(&i) => out[i].intercept = out[i].intercept.max(p.intercept),
                None => {
                    pos.insert(key, out.len());
                    out.push(*p);
                }
            }
        }
        PiecewiseAffineConvex::new(out).expect("nonempty")
    }
}

pub fn evaluate(f: &PiecewiseAffineConvex, x: Point2) -> f64 {
    f.evaluate(x)
}
