//! Weighted graph Laplacians and a Jacobi-preconditioned CG solver.

/// Symmetric graph Laplacian stored as adjacency lists.
#[derive(Clone, Debug)]
pub struct Laplacian {
    diag: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl Laplacian {
    /// `edges` holds `(i, j, weight)` with `i != j`; repeated pairs accumulate.
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut diag = vec![0.0; n];
        let mut rows = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            diag[i] += w;
            diag[j] += w;
            rows[i].push((j, w));
            rows[j].push((i, w));
        }
        Laplacian { diag, rows }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.diag.len() {
            let mut s = self.diag[i] * x[i];
            for &(j, w) in &self.rows[i] {
                s -= w * x[j];
            }
            out[i] = s;
        }
    }

    /// Solves `L x = b` with `x[pin] = 0`, ignoring row `pin`.
    ///
    /// Returns `None` if CG breaks down (disconnected graph).
    pub fn solve_pinned(&self, b: &[f64], pin: usize, rtol: f64, max_iter: usize) -> Option<Vec<f64>> {
        let n = self.len();
        let mut x = vec![0.0; n];
        if n <= 1 {
            return Some(x);
        }
        let project = |v: &mut [f64]| v[pin] = 0.0;
        let mut r = b.to_vec();
        project(&mut r);
        let inv: Vec<f64> = self.diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 }).collect();
        if inv.iter().enumerate().any(|(i, &v)| i != pin && v == 0.0) {
            return None;
        }
        let bnorm = norm(&r);
        if bnorm == 0.0 {
            return Some(x);
        }
        let mut z: Vec<f64> = r.iter().zip(&inv).map(|(a, b)| a * b).collect();
        project(&mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        for _ in 0..max_iter {
            self.apply(&p, &mut ap);
            project(&mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return None;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if norm(&r) <= rtol * bnorm {
                return Some(x);
            }
            for i in 0..n {
                z[i] = r[i] * inv[i];
            }
            project(&mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Some(x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
