//! Semi-discrete and partial optimal transport in the plane, with tools to
//! extract and classify the singular set of the Brenier potential and the
//! free boundary of partial transport.

pub mod fixtures;
pub mod geometry;
pub mod io;
pub mod otsolve;
pub mod oracle;
pub mod partial;
pub mod potential;
pub mod singular;
pub mod svg;

pub use geometry::{ConvexPolygon, HalfPlane, Location, Point2, Polygon, Segment};
