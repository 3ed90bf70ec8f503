//! Exact argmax queries over a large family of affine functions.
//!
//! Pieces are organised in a kd-tree over their gradients. Each node stores a
//! least-squares fit `c ≈ alpha + beta . g` of the intercepts together with
//! the largest upward residual, which yields an upper bound on every piece in
//! the node at a query point.

use crate::geometry::Point2;

const LEAF: usize = 8;

#[derive(Clone, Debug)]
struct Node {
    lo: Point2,
    hi: Point2,
    alpha: f64,
    beta: Point2,
    eps: f64,
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct MaxAffineIndex {
    nodes: Vec<Node>,
    order: Vec<usize>,
    g: Vec<Point2>,
    c: Vec<f64>,
}

impl MaxAffineIndex {
    pub fn new(g: &[Point2], c: &[f64]) -> Self {
        assert_eq!(g.len(), c.len());
        assert!(!g.is_empty(), "index needs at least one piece");
        let mut idx = MaxAffineIndex {
            nodes: Vec::with_capacity(2 * g.len() / LEAF + 2),
            order: (0..g.len()).collect(),
            g: g.to_vec(),
            c: c.to_vec(),
        };
        idx.build(0, g.len());
        idx
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn gradients(&self) -> &[Point2] {
        &self.g
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.c
    }

    #[inline]
    pub fn value(&self, j: usize, x: Point2) -> f64 {
        self.g[j].dot(x) + self.c[j]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        let items = &self.order[start..end];
        let mut lo = self.g[items[0]];
        let mut hi = lo;
        for &j in items {
            let p = self.g[j];
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        let (alpha, beta, eps) = fit(items, &self.g, &self.c);
        self.nodes.push(Node {
            lo,
            hi,
            alpha,
            beta,
            eps,
            start,
            end,
            children: None,
        });
        if end - start > LEAF {
            let axis_x = hi.x - lo.x >= hi.y - lo.y;
            let mid = (start + end) / 2;
            let g = &self.g;
            let key = |j: &usize| if axis_x { g[*j].x } else { g[*j].y };
            self.order[start..end].select_nth_unstable_by(mid - start, |a, b| {
                key(a).total_cmp(&key(b)).then(a.cmp(b))
            });
            let l = self.build(start, mid);
            let r = self.build(mid, end);
            self.nodes[id].children = Some((l, r));
        }
        id
    }

    #[inline]
    fn bound(&self, n: &Node, x: Point2) -> f64 {
        let d = x + n.beta;
        let gx = if d.x >= 0.0 { n.hi.x } else { n.lo.x };
        let gy = if d.y >= 0.0 { n.hi.y } else { n.lo.y };
        let b = n.alpha + n.eps + gx * d.x + gy * d.y;
        b + 1e-12 * (1.0 + b.abs() + n.alpha.abs() + (gx * d.x).abs() + (gy * d.y).abs())
    }

    /// Index and value of the maximal piece at `x`; ties go to the lowest index.
    pub fn argmax(&self, x: Point2) -> (usize, f64) {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        self.search(0, x, &mut best);
        best
    }

    fn search(&self, id: usize, x: Point2, best: &mut (usize, f64)) {
        let n = &self.nodes[id];
        if self.bound(n, x) < best.1 {
            return;
        }
        match n.children {
            None => {
                for &j in &self.order[n.start..n.end] {
                    let v = self.value(j, x);
                    if v > best.1 || (v == best.1 && j < best.0) {
                        *best = (j, v);
                    }
                }
            }
            Some((l, r)) => {
                let bl = self.bound(&self.nodes[l], x);
                let br = self.bound(&self.nodes[r], x);
                if bl >= br {
                    self.search(l, x, best);
                    self.search(r, x, best);
                } else {
                    self.search(r, x, best);
                    self.search(l, x, best);
                }
            }
        }
    }

    /// All pieces whose value at `x` is at least `threshold`, sorted by index.
    pub fn above(&self, x: Point2, threshold: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect(0, x, threshold, &mut out);
        out.sort_unstable();
        out
    }

    fn collect(&self, id: usize, x: Point2, t: f64, out: &mut Vec<usize>) {
        let n = &self.nodes[id];
        if self.bound(n, x) < t {
            return;
        }
        match n.children {
            None => {
                for &j in &self.order[n.start..n.end] {
                    if self.value(j, x) >= t {
                        out.push(j);
                    }
                }
            }
            Some((l, r)) => {
                self.collect(l, x, t, out);
                self.collect(r, x, t, out);
            }
        }
    }
}

/// Least-squares plane through `(g_j, c_j)` plus the maximal upward residual.
fn fit(items: &[usize], g: &[Point2], c: &[f64]) -> (f64, Point2, f64) {
    let n = items.len() as f64;
    let (mut mx, mut my, mut mc) = (0.0, 0.0, 0.0);
    for &j in items {
        mx += g[j].x;
        my += g[j].y;
        mc += c[j];
    }
    mx /= n;
    my /= n;
    mc /= n;
    let (mut sxx, mut sxy, mut syy, mut sxc, mut syc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &j in items {
        let dx = g[j].x - mx;
        let dy = g[j].y - my;
        let dc = c[j] - mc;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        sxc += dx * dc;
        syc += dy * dc;
    }
    let det = sxx * syy - sxy * sxy;
    let scale = (sxx + syy).max(1e-300);
    let beta = if det > 1e-12 * scale * scale {
        Point2::new((syy * sxc - sxy * syc) / det, (sxx * syc - sxy * sxc) / det)
    } else {
        Point2::ZERO
    };
    let alpha = mc - beta.x * mx - beta.y * my;
    let mut eps = f64::NEG_INFINITY;
    for &j in items {
        eps = eps.max(c[j] - alpha - beta.dot(g[j]));
    }
    (alpha, beta, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(g: &[Point2], c: &[f64], x: Point2) -> (usize, f64) {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for j in 0..g.len() {
            let v = g[j].dot(x) + c[j];
            if v > best.1 {
                best = (j, v);
            }
        }
        best
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &n in &[1usize, 5, 40, 700] {
            let g: Vec<Point2> = (0..n).map(|_| Point2::new(rng.gen(), rng.gen())).collect();
            let c: Vec<f64> = g.iter().map(|p| -0.5 * p.norm2() + 0.01 * rng.gen::<f64>()).collect();
            let idx = MaxAffineIndex::new(&g, &c);
            for _ in 0..300 {
                let x = Point2::new(rng.gen_range(-1.0..2.0), rng.gen_range(-1.0..2.0));
                assert_eq!(idx.argmax(x), brute(&g, &c, x));
                let (_, m) = brute(&g, &c, x);
                let want: Vec<usize> = (0..n).filter(|&j| g[j].dot(x) + c[j] >= m - 0.05).collect();
                assert_eq!(idx.above(x, m - 0.05), want);
            }
        }
    }

    #[test]
    fn ties_prefer_lowest_index() {
        let g = vec![Point2::new(1.0, 0.0), Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0)];
        let idx = MaxAffineIndex::new(&g, &[0.0, 0.0, 0.0]);
        assert_eq!(idx.argmax(Point2::new(0.0, 3.0)).0, 0);
        assert_eq!(idx.argmax(Point2::new(1.0, 0.0)).0, 0);
    }
}
