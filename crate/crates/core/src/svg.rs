//! Deterministic SVG figures. Every coordinate is printed with nine
//! significant digits, so equal inputs give equal bytes.

use std::fmt::Write;

use crate::geometry::{Point2, Polygon};
use crate::otsolve::LaguerreDiagram;
use crate::partial::PartialSolution;
use crate::singular::{PointTag, SingularReport};

const WIDTH: f64 = 800.0;

/// `x` rounded to nine significant digits, in shortest form.
pub fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { format!("{x}") };
    }
    let r: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    format!("{r}")
}

/// World-to-pixel mapping with the y axis pointing up.
pub struct Canvas {
    lo: Point2,
    scale: f64,
    height: f64,
    body: String,
}

impl Canvas {
    pub fn new(lo: Point2, hi: Point2) -> Canvas {
        let span = (hi - lo).x.max((hi - lo).y).max(1e-12);
        let pad = 0.05 * span;
        let lo = lo - Point2::new(pad, pad);
        let hi = hi + Point2::new(pad, pad);
        let scale = WIDTH / (hi.x - lo.x);
        Canvas {
            lo,
            scale,
            height: (hi.y - lo.y) * scale,
            body: String::new(),
        }
    }

    /// Bounding box of all given points.
    pub fn fitting<'a>(points: impl IntoIterator<Item = &'a Point2>) -> Canvas {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if !lo.is_finite() {
            lo = Point2::ZERO;
            hi = Point2::new(1.0, 1.0);
        }
        Canvas::new(lo, hi)
    }

    fn px(&self, p: Point2) -> String {
        let x = (p.x - self.lo.x) * self.scale;
        let y = self.height - (p.y - self.lo.y) * self.scale;
        format!("{},{}", num(x), num(y))
    }

    fn points(&self, pts: &[Point2]) -> String {
        pts.iter().map(|&p| self.px(p)).collect::<Vec<_>>().join(" ")
    }

    pub fn polygon(&mut self, pts: &[Point2], style: &str) {
        if pts.len() >= 2 {
            let s = self.points(pts);
            writeln!(self.body, "<polygon points=\"{s}\" {style}/>").unwrap();
        }
    }

    pub fn polyline(&mut self, pts: &[Point2], style: &str) {
        if pts.len() >= 2 {
            let s = self.points(pts);
            writeln!(self.body, "<polyline points=\"{s}\" fill=\"none\" {style}/>").unwrap();
        }
    }

    pub fn line(&mut self, a: Point2, b: Point2, style: &str) {
        self.polyline(&[a, b], style);
    }

    /// Circle of radius `r` pixels.
    pub fn dot(&mut self, p: Point2, r: f64, style: &str) {
        let x = (p.x - self.lo.x) * self.scale;
        let y = self.height - (p.y - self.lo.y) * self.scale;
        writeln!(self.body, "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" {style}/>", num(x), num(y), num(r)).unwrap();
    }

    /// Arrow from `a` to `b` with a small head.
    pub fn arrow(&mut self, a: Point2, b: Point2, style: &str) {
        self.line(a, b, style);
        let d = b - a;
        let len = d.norm();
        if len > 0.0 {
            let head = (8.0 / self.scale).min(0.3 * len);
            let u = d * (1.0 / len);
            let w = u.perp();
            let back = b - u * head;
            self.polyline(&[back + w * (0.5 * head), b, back - w * (0.5 * head)], style);
        }
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            num(WIDTH),
            num(self.height),
            num(WIDTH),
            num(self.height),
            self.body
        )
    }
}

fn draw_diagram(c: &mut Canvas, diag: &LaguerreDiagram, target: &Polygon) {
    for cell in &diag.cells {
        c.polygon(cell.vertices(), "fill=\"#f4f4f4\" stroke=\"#888\" stroke-width=\"0.5\"");
    }
    c.polygon(target.vertices(), "fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.5\"");
    for &y in &diag.sites {
        c.dot(y, 1.2, "fill=\"#1f5fbf\"");
    }
}

fn diagram_canvas(diag: &LaguerreDiagram, target: &Polygon) -> Canvas {
    Canvas::fitting(diag.source().vertices().iter().chain(target.vertices()))
}

/// Laguerre cells in the source, the target outline and its sites.
pub fn cells_svg(diag: &LaguerreDiagram, target: &Polygon) -> String {
    let mut c = diagram_canvas(diag, target);
    draw_diagram(&mut c, diag, target);
    c.finish()
}

/// Cells with the singular edges in red and classified nodes marked.
pub fn singular_svg(diag: &LaguerreDiagram, target: &Polygon, report: &SingularReport) -> String {
    let mut c = diagram_canvas(diag, target);
    draw_diagram(&mut c, diag, target);
    for e in &report.graph.edges {
        c.line(e.edge.a, e.edge.b, "stroke=\"#d62728\" stroke-width=\"2\"");
    }
    for cl in &report.classes {
        let p = report.graph.nodes[cl.node].position;
        match cl.tag {
            PointTag::Sigma1 => c.dot(p, 4.0, "fill=\"#2ca02c\""),
            PointTag::Sigma2DoublePrime => c.dot(p, 4.0, "fill=\"#9467bd\""),
            PointTag::Sigma2Prime => {}
        }
    }
    c.finish()
}

/// Partial transport in the separated frame: active samples shaded, free
/// boundary in red, a subsample of the coupling as arrows and the
/// separating line dashed.
pub fn partial_svg(sol: &PartialSolution, arrows: usize) -> String {
    let (s, t) = (&sol.problem.source, &sol.problem.target);
    let mut c = Canvas::fitting(s.vertices().iter().chain(t.vertices()));
    c.polygon(s.vertices(), "fill=\"none\" stroke=\"#333\" stroke-width=\"1\"");
    c.polygon(t.vertices(), "fill=\"none\" stroke=\"#333\" stroke-width=\"1\"");
    for (grid, active, fill) in [
        (&sol.source_grid, &sol.active_source, "#9ecae1"),
        (&sol.target_grid, &sol.active_target, "#fdd0a2"),
    ] {
        let h = 0.5 * grid.pitch;
        let style = format!("fill=\"{fill}\" stroke=\"none\"");
        for &k in active {
            let p = grid.points[k];
            let sq = [
                p + Point2::new(-h, -h),
                p + Point2::new(h, -h),
                p + Point2::new(h, h),
                p + Point2::new(-h, h),
            ];
            c.polygon(&sq, &style);
        }
    }
    if let Some(fb) = &sol.free_boundary {
        for l in &fb.polylines {
            c.polyline(l, "stroke=\"#d62728\" stroke-width=\"2\"");
        }
        for l in &fb.target_polylines {
            c.polyline(l, "stroke=\"#d62728\" stroke-width=\"1\" stroke-dasharray=\"3,2\"");
        }
    }
    let (lo, hi) = (s.bbox(), t.bbox());
    let (y0, y1) = (lo.0.y.min(hi.0.y), lo.1.y.max(hi.1.y));
    c.line(
        Point2::new(0.0, y0),
        Point2::new(0.0, y1),
        "stroke=\"#555\" stroke-width=\"1\" stroke-dasharray=\"6,4\"",
    );
    let plan = &sol.plan;
    let step = (plan.couplings.len() / arrows.max(1)).max(1);
    for &(i, j, _) in plan.couplings.iter().step_by(step) {
        c.arrow(plan.source_samples[i], plan.target_samples[j], "stroke=\"#555\" stroke-width=\"0.5\"");
    }
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(num(1.0 / 3.0), "0.333333333");
        assert_eq!(num(2.0), "2");
        assert_eq!(num(-123456.789012), "-123456.789");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1e-20 / 3.0).parse::<f64>().unwrap(), 3.33333333e-21);
    }

    #[test]
    fn canvas_flips_y() {
        let mut c = Canvas::new(Point2::ZERO, Point2::new(1.0, 1.0));
        c.dot(Point2::new(0.0, 1.0), 1.0, "");
        let s = c.finish();
        assert!(s.contains("cy=\"36.3636364\""), "{s}");
        assert!(s.starts_with("<svg"));
    }
}
