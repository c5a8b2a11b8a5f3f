//! Ascent over tuples of orthogonal matrices, used for the sup-over-contractions
//! formulas. The objectives are convex in the matrices, so their maximum over
//! the unit ball is attained at orthogonal (or unitary) extreme points.

use crate::linalg::{self, Mat};

/// Σ_k a_k ⊗ D_k.
pub(crate) fn kron_sum(coeffs: &[Mat], ds: &[Mat]) -> Mat {
    let mut out = coeffs[0].kron(&ds[0]);
    for (a, d) in coeffs.iter().zip(ds).skip(1) {
        out = out.add(&a.kron(d));
    }
    out
}

/// ‖Σ_k a_k ⊗ D_k‖ and its gradient with respect to each D_k.
pub(crate) fn kron_sum_grad(coeffs: &[Mat], ds: &[Mat]) -> (f64, Vec<Mat>) {
    let n = coeffs[0].rows();
    let m = ds[0].rows();
    let (s, u, v) = linalg::top_singular(&kron_sum(coeffs, ds));
    let um = Mat::from_vec(n, m, u).expect("finite");
    let vm = Mat::from_vec(n, m, v).expect("finite");
    let umt = um.transpose();
    let grads = coeffs.iter().map(|a| umt.matmul(a).matmul(&vm)).collect();
    (s, grads)
}

/// Riemannian ascent Q_i <- Q_i exp(t S_i), S_i = skew(Q_i^T G_i), with Armijo
/// backtracking. Returns the best value and point.
pub(crate) fn orthogonal_ascent(
    start: Vec<Mat>,
    iters: usize,
    value: impl Fn(&[Mat]) -> f64,
    value_grad: impl Fn(&[Mat]) -> (f64, Vec<Mat>),
) -> (f64, Vec<Mat>) {
    let mut qs = start;
    let (mut f, mut grads) = value_grad(&qs);
    let mut step = 1.0;
    for _ in 0..iters {
        let dirs: Vec<Mat> = qs
            .iter()
            .zip(&grads)
            .map(|(q, g)| linalg::skew(&q.transpose().matmul(g)))
            .collect();
        let slope: f64 = dirs.iter().map(|s| s.dot(s)).sum();
        if slope < 1e-26 {
            break;
        }
        let mut t = step;
        let mut moved = None;
        for _ in 0..50 {
            let trial: Vec<Mat> = qs
                .iter()
                .zip(&dirs)
                .map(|(q, s)| q.matmul(&linalg::expm(&s.scale(t))))
                .collect();
            let ft = value(&trial);
            if ft >= f + 1e-4 * t * slope {
                moved = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((next, fnext)) = moved else { break };
        let gain = fnext - f;
        qs = next;
        let (fv, gv) = value_grad(&qs);
        f = fv;
        grads = gv;
        step = (2.0 * t).min(10.0);
        if gain <= 1e-15 * f.abs().max(1e-300) {
            break;
        }
    }
    (f, qs)
}

/// All m x m signed permutation matrices, in a fixed order.
pub(crate) fn signed_permutations(m: usize) -> Vec<Mat> {
    fn perms(m: usize) -> Vec<Vec<usize>> {
        if m == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(m - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, m - 1);
                out.push(q);
            }
        }
        out
    }
    let mut ps = perms(m);
    ps.sort();
    let mut out = Vec::new();
    for p in ps {
        for signs in 0..(1u32 << m) {
            let mut q = Mat::zeros(m, m);
            for (i, &j) in p.iter().enumerate() {
                q[(i, j)] = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
            }
            out.push(q);
        }
    }
    out
}
