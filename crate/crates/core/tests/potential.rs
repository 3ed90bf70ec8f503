use proptest::prelude::*;

use polyot::fixtures::square;
use polyot::oracle::{grid_subdifferential, SlopeLattice};
use polyot::potential::{legendre, ma_measure, subdifferential_at, subdivision_vertices, PiecewiseAffineConvex};
use polyot::Point2;

fn pt(r: f64) -> impl Strategy<Value = Point2> {
    (-r..r, -r..r).prop_map(|(x, y)| Point2::new(x, y))
}

fn pa() -> impl Strategy<Value = PiecewiseAffineConvex> {
    prop::collection::vec((pt(1.0), -0.5..0.5f64), 2..12).prop_map(|v| {
        let (g, c): (Vec<Point2>, Vec<f64>) = v.into_iter().unzip();
        PiecewiseAffineConvex::from_parts(&g, &c).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn involution(f in pa(), probes in prop::collection::vec(pt(1.0), 10)) {
        let d = square(-1.0, -1.0, 2.0);
        let back = legendre(&legendre(&f, &d), &d);
        for x in subdivision_vertices(&f, &d).into_iter().chain(probes) {
            prop_assert!((back.evaluate(x) - f.evaluate(x)).abs() <= 1e-9, "at {:?}", x);
        }
    }

    #[test]
    fn fenchel_young(f in pa(), xs in prop::collection::vec(pt(1.0), 8), ys in prop::collection::vec(pt(2.0), 8)) {
        let d = square(-1.0, -1.0, 2.0);
        let fs = legendre(&f, &d);
        for &x in &xs {
            for &y in &ys {
                prop_assert!(f.evaluate(x) + fs.evaluate(y) >= x.dot(y) - 1e-12);
            }
        }
        // equality along the gradient at a point where one piece is active
        for &x in &xs {
            let s = subdifferential_at(&f, x, 1e-12);
            if s.hull.len() == 1 {
                let g = s.hull.vertices()[0];
                prop_assert!((f.evaluate(x) + fs.evaluate(g) - x.dot(g)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn subgradients_are_monotone(f in pa(), xs in prop::collection::vec(pt(1.0), 12)) {
        let hulls: Vec<_> = xs.iter().map(|&x| subdifferential_at(&f, x, 1e-9)).collect();
        for (a, ha) in xs.iter().zip(&hulls) {
            for (b, hb) in xs.iter().zip(&hulls) {
                for &p in ha.hull.vertices() {
                    for &q in hb.hull.vertices() {
                        prop_assert!((p - q).dot(*a - *b) >= -1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn grid_subdifferential_matches_active_hull() {
    // three planes meeting at the origin; the subdifferential there is their slope triangle
    let g = [Point2::new(-0.5, -0.4), Point2::new(0.6, -0.3), Point2::new(0.1, 0.7)];
    let f = PiecewiseAffineConvex::from_parts(&g, &[0.0, 0.0, 0.0]).unwrap();
    let exact = subdifferential_at(&f, Point2::ZERO, 1e-12).hull;
    assert!((exact.area() - 0.5 * (g[1] - g[0]).cross(g[2] - g[0]).abs()).abs() < 1e-15);
    let grid: Vec<Point2> = (0..=40)
        .flat_map(|i| (0..=40).map(move |j| Point2::new(-1.0 + 0.05 * i as f64, -1.0 + 0.05 * j as f64)))
        .collect();
    let lattice = SlopeLattice {
        lo: Point2::new(-1.0, -1.0),
        hi: Point2::new(1.0, 1.0),
        pitch: 0.01,
    };
    let approx = grid_subdifferential(|x| f.evaluate(x), Point2::ZERO, &grid, &lattice, 1e-12);
    // the lattice hull is inflated by at most one cell around the exact triangle
    for &v in exact.vertices() {
        assert!(approx.contains(v, 1e-12), "{v:?}");
    }
    for &v in approx.vertices() {
        assert!(exact.distance_to_point(v) <= 0.02, "{v:?}");
    }
    assert!((approx.area() - exact.area()).abs() < 0.05 * exact.area() + 0.02);
}

#[test]
fn measure_of_quadratic_tangents() {
    // tangent planes of |x|^2/2 on a lattice of pitch 0.1: the subdivision
    // vertices are the dual lattice points, each carrying a square of side 0.1
    let k = 20;
    let pts: Vec<Point2> = (0..=k)
        .flat_map(|i| (0..=k).map(move |j| Point2::new(-1.0 + 2.0 * i as f64 / k as f64, -1.0 + 2.0 * j as f64 / k as f64)))
        .collect();
    let f = PiecewiseAffineConvex::from_tangents(&pts, |x| (0.5 * x.norm2(), x)).unwrap();
    // 10 x 10 dual points inside, none on the boundary
    assert!((ma_measure(&f, &square(-0.5, -0.5, 1.0)) - 1.0).abs() < 1e-12);
    // shifted by a quarter pitch: 9 x 9 inside
    assert!((ma_measure(&f, &square(-0.475, -0.475, 0.9)) - 0.81).abs() < 1e-12);
}
