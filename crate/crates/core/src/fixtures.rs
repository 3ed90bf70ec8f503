//! Bundled test geometries.

use crate::geometry::Polygon;

fn poly(c: &[(f64, f64)]) -> Polygon {
    Polygon::from_coords(c).expect("fixture polygon is valid")
}

pub fn unit_square() -> Polygon {
    poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
}

/// Axis-aligned square `[x0, x0 + side] x [y0, y0 + side]`.
pub fn square(x0: f64, y0: f64, side: f64) -> Polygon {
    poly(&[(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)])
}

/// Three unit squares; reflex corner at (1, 1).
pub fn l_shape() -> Polygon {
    poly(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)])
}

/// Regular hexagon of circumradius 1 centred at the origin.
pub fn hexagon() -> Polygon {
    let c: Vec<(f64, f64)> = (0..6)
        .map(|k| {
            let t = std::f64::consts::PI / 3.0 * k as f64;
            (t.cos(), t.sin())
        })
        .collect();
    poly(&c)
}

/// Two unit squares joined by a neck of width 0.1 (8 vertices, two reflex).
pub fn dumbbell() -> Polygon {
    poly(&[
        (0.0, 0.0),
        (1.0, 0.0),
        (1.0, 0.9),
        (2.0, 0.9),
        (2.0, 1.9),
        (1.0, 1.9),
        (1.0, 1.0),
        (0.0, 1.0),
    ])
}

/// Square of the given area with lower-left corner at the origin.
pub fn square_of_area(area: f64) -> Polygon {
    square(0.0, 0.0, area.sqrt())
}
