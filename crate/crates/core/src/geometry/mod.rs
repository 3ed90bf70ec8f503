//! Planar primitives: points, polygons, convex clipping, point location.

mod convex;
mod point;
mod polygon;
mod triangulate;

pub use convex::{clip_convex, intersect_convex, shoelace, ConvexPolygon, EdgeLabel, HalfPlane, LabeledPolygon};
pub use point::{line_angle, segments_intersect, turning_angle, Point2, Segment};
pub(crate) use point::segment_crossing_param;
pub use polygon::{
    is_concave_vertex, point_location, polygon_area, segment_exits, uncovered_length, Location, Polygon,
    PolygonSpec,
};
pub use triangulate::triangulate;

/// Default absolute tolerance on O(1) coordinates.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("polygon is not simple: {0}")]
    NonSimple(String),
    #[error("polygon holes are not supported")]
    HolesUnsupported,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("segment endpoint ({x}, {y}) lies outside the polygon")]
    EndpointOutside { x: f64, y: f64 },
    #[error("triangulation failed on degenerate input")]
    TriangulationFailure,
}
