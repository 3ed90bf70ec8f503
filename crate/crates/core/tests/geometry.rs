use proptest::prelude::*;

use polyot::geometry::{clip_convex, intersect_convex, point_location, triangulate};
use polyot::{ConvexPolygon, HalfPlane, Location, Point2, Polygon};

fn pt() -> impl Strategy<Value = Point2> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Point2::new(x, y))
}

fn convex() -> impl Strategy<Value = ConvexPolygon> {
    prop::collection::vec(pt(), 3..12)
        .prop_map(|p| ConvexPolygon::hull(&p))
        .prop_filter("nondegenerate", |c| c.len() >= 3 && c.area() > 1e-3)
}

/// Star-shaped polygon around the origin with sorted angles and positive radii.
fn star() -> impl Strategy<Value = Polygon> {
    prop::collection::vec((0.0..1.0f64, 0.3..2.0f64), 3..14).prop_filter_map("simple", |mut v| {
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let n = v.len() as f64;
        let pts: Vec<Point2> = v
            .iter()
            .enumerate()
            .map(|(i, &(t, r))| {
                let a = std::f64::consts::TAU * (i as f64 + 0.8 * t) / n;
                Point2::new(r * a.cos(), r * a.sin())
            })
            .collect();
        Polygon::new(pts).ok()
    })
}

fn tri_area(t: &[Point2; 3]) -> f64 {
    0.5 * ((t[1] - t[0]).cross(t[2] - t[0]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn clip_halves_add_up(c in convex(), dir in 0.0..std::f64::consts::TAU, off in -2.0..2.0f64) {
        let h = HalfPlane::new(Point2::new(dir.cos(), dir.sin()), off).unwrap();
        let a = clip_convex(&c, &h).area();
        let b = clip_convex(&c, &h.flipped()).area();
        prop_assert!((a + b - c.area()).abs() <= 1e-12 * (1.0 + c.area()));
        prop_assert!(a >= 0.0 && b >= 0.0);
    }

    #[test]
    fn intersection_is_symmetric_and_contained(a in convex(), b in convex()) {
        let ab = intersect_convex(&a, &b);
        let ba = intersect_convex(&b, &a);
        prop_assert!((ab.area() - ba.area()).abs() <= 1e-10);
        prop_assert!(ab.area() <= a.area().min(b.area()) + 1e-12);
        for &v in ab.vertices() {
            prop_assert!(a.contains(v, 1e-9) && b.contains(v, 1e-9));
        }
    }

    #[test]
    fn triangulation_covers_polygon(p in star()) {
        let tris = triangulate(&p);
        prop_assert_eq!(tris.len(), p.len() - 2);
        let total: f64 = tris.iter().map(tri_area).sum();
        prop_assert!((total - p.area()).abs() <= 1e-12 * p.area().max(1.0));
        prop_assert!(tris.iter().all(|t| tri_area(t) > -1e-15));
    }

    #[test]
    fn centroids_of_triangles_are_inside(p in star()) {
        for t in p.triangles() {
            let c = (t[0] + t[1] + t[2]) / 3.0;
            if tri_area(t) > 1e-9 {
                prop_assert_ne!(point_location(&p, c, 1e-12), Location::Outside);
            }
        }
    }

    #[test]
    fn convex_polygon_area_matches_its_triangulation(c in convex()) {
        let p = Polygon::new(c.vertices().to_vec()).unwrap();
        prop_assert!((p.area() - c.area()).abs() <= 1e-12 * c.area().max(1.0));
        prop_assert!(p.is_convex());
    }
}

#[test]
fn unit_cases() {
    let sq = ConvexPolygon::rectangle(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0));
    let h = HalfPlane::new(Point2::new(1.0, 1.0), 1.0).unwrap();
    assert!((clip_convex(&sq, &h).area() - 0.5).abs() < 1e-15);
    let far = ConvexPolygon::rectangle(Point2::new(5.0, 5.0), Point2::new(6.0, 6.0));
    assert!(intersect_convex(&sq, &far).area() == 0.0);
}
