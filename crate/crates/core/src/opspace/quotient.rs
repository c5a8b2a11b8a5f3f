//! Quotient norms ‖x + M_n(Y)‖ = min_y ‖x - y‖ for a subspace Y of X.
//!
//! The minimization of σ_max over an affine family is posed as
//! `min s  s.t.  [[sI, A(t)], [A(t)^T, sI]] ⪰ 0` and solved with a log-det
//! barrier path-following method. The reported value is σ_max at the final
//! iterate (an upper bound for the infimum); `lower_bound` is the barrier
//! estimate s - N/τ, and `gap` is their difference.

use serde::Serialize;

use super::{MatElem, OpSpace};
use crate::error::{shape_err, Result};
use crate::linalg::{self, Mat};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuotientOptions {
    /// Budget of Newton steps across all barrier stages.
    pub max_iters: usize,
    /// Target gap between the returned value and the lower estimate.
    pub tol: f64,
}

impl Default for QuotientOptions {
    fn default() -> Self {
        QuotientOptions {
            max_iters: 5000,
            tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotientNorm {
    pub value: f64,
    pub lower_bound: f64,
    pub gap: f64,
    pub converged: bool,
    pub newton_steps: usize,
    /// The minimizing y in M_n(Y), as coefficients over the basis of X.
    pub minimizer: MatElem,
}

struct Barrier {
    n_big: usize,
    a0: Mat,
    gens: Vec<Mat>,
}

impl Barrier {
    fn affine(&self, t: &[f64]) -> Mat {
        let mut a = self.a0.clone();
        for (g, &tj) in self.gens.iter().zip(t) {
            if tj != 0.0 {
                a.axpy(-tj, g);
            }
        }
        a
    }

    fn lmi(&self, s: f64, t: &[f64]) -> Mat {
        let a = self.affine(t);
        let (r, c) = a.shape();
        let mut f = Mat::zeros(r + c, r + c);
        for i in 0..r + c {
            f[(i, i)] = s;
        }
        f.set_block(0, r, &a);
        f.set_block(r, 0, &a.transpose());
        f
    }

    fn generator(&self, j: usize) -> Mat {
        let g = &self.gens[j];
        let (r, c) = g.shape();
        let mut f = Mat::zeros(r + c, r + c);
        f.set_block(0, r, &g.scale(-1.0));
        f.set_block(r, 0, &g.transpose().scale(-1.0));
        f
    }

    /// Barrier objective, or None outside the interior.
    fn objective(&self, tau: f64, s: f64, t: &[f64]) -> Option<f64> {
        let l = linalg::cholesky(&self.lmi(s, t))?;
        let logdet: f64 = (0..self.n_big).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0;
        Some(tau * s - logdet)
    }
}

pub fn quotient_level_norm(
    space: &OpSpace,
    subspace: &[Vec<f64>],
    x: &MatElem,
    opts: &QuotientOptions,
) -> Result<QuotientNorm> {
    space.check_elem(x)?;
    let d = space.dim();
    for (l, y) in subspace.iter().enumerate() {
        if y.len() != d {
            return Err(shape_err(
                format!("{d} coefficients per subspace vector"),
                format!("{} in vector {l}", y.len()),
            ));
        }
    }
    let n = x.level();
    let a0 = space.realize(x)?;
    let norm_x = linalg::spectral_norm(&a0);
    let mut gens = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for y in subspace {
                let mut e = MatElem::zeros(n, d);
                e.entry_mut(a, b).copy_from_slice(y);
                gens.push(space.realize_unchecked(&e));
            }
        }
    }
    let zero_y = MatElem::zeros(n, d);
    if norm_x == 0.0 || gens.is_empty() {
        return Ok(QuotientNorm {
            value: norm_x,
            lower_bound: norm_x,
            gap: 0.0,
            converged: true,
            newton_steps: 0,
            minimizer: zero_y,
        });
    }
    let (np, nq) = a0.shape();
    let bar = Barrier {
        n_big: np + nq,
        a0,
        gens,
    };
    let m = bar.gens.len();
    let fgens: Vec<Mat> = (0..m).map(|j| bar.generator(j)).collect();
    let big_n = bar.n_big as f64;

    let mut s = 1.5 * norm_x;
    let mut t = vec![0.0; m];
    let mut tau = big_n / norm_x;
    let mut steps = 0;
    let target = opts.tol * 0.1;

    'outer: loop {
        // centering
        loop {
            if steps >= opts.max_iters {
                break 'outer;
            }
            let f = bar.lmi(s, &t);
            let Some(l) = linalg::cholesky(&f) else {
                break 'outer;
            };
            let finv = linalg::cholesky_inverse(&l);
            let mut ks = Vec::with_capacity(m + 1);
            ks.push(finv.clone());
            for fg in &fgens {
                ks.push(finv.matmul(fg));
            }
            let dimz = m + 1;
            let mut grad = vec![0.0; dimz];
            grad[0] = tau - finv.trace();
            for j in 0..m {
                grad[j + 1] = -ks[j + 1].trace();
            }
            let mut h = Mat::zeros(dimz, dimz);
            let kts: Vec<Mat> = ks.iter().map(Mat::transpose).collect();
            for a in 0..dimz {
                for b in a..dimz {
                    // tr(K_a K_b) = <K_a, K_b^T>
                    let v = ks[a].dot(&kts[b]);
                    h[(a, b)] = v;
                    h[(b, a)] = v;
                }
            }
            let maxdiag = (0..dimz).map(|i| h[(i, i)]).fold(0.0, f64::max);
            let mut ridge = 1e-14 * maxdiag;
            let lh = loop {
                let mut hr = h.clone();
                for i in 0..dimz {
                    hr[(i, i)] += ridge;
                }
                if let Some(lh) = linalg::cholesky(&hr) {
                    break lh;
                }
                ridge = if ridge == 0.0 { 1e-300 } else { ridge * 100.0 };
            };
            let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
            let dz = linalg::cholesky_solve(&lh, &neg);
            let slope: f64 = grad.iter().zip(&dz).map(|(a, b)| a * b).sum();
            steps += 1;
            if -slope / 2.0 < 1e-11 {
                break;
            }
            let phi = bar
                .objective(tau, s, &t)
                .expect("current iterate is interior");
            let mut alpha = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let s2 = s + alpha * dz[0];
                let t2: Vec<f64> = t.iter().zip(&dz[1..]).map(|(a, b)| a + alpha * b).collect();
                if let Some(phi2) = bar.objective(tau, s2, &t2) {
                    if phi2 <= phi + 0.25 * alpha * slope {
                        s = s2;
                        t = t2;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if big_n / tau <= target {
            break;
        }
        tau *= 10.0;
    }

    let value = linalg::spectral_norm(&bar.affine(&t));
    let lower = (s - big_n / tau).max(0.0).min(value);
    let gap = value - lower;
    let mut y = MatElem::zeros(n, d);
    let mut idx = 0;
    for a in 0..n {
        for b in 0..n {
            for sv in subspace {
                let tj = t[idx];
                idx += 1;
                for (dst, &c) in y.entry_mut(a, b).iter_mut().zip(sv) {
                    *dst += tj * c;
                }
            }
        }
    }
    Ok(QuotientNorm {
        value,
        lower_bound: lower,
        gap,
        converged: gap <= opts.tol,
        newton_steps: steps,
        minimizer: y,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexQuotient {
    /// ‖x + iy + M_n(Y_c)‖ in X_c / Y_c.
    pub quotient_of_complexification: QuotientNorm,
    /// ‖[[x, -y], [y, x]] + M_2n(Y)‖, the level-n norm of x + iy in (X/Y)_c.
    pub complexification_of_quotient: QuotientNorm,
    pub gap: f64,
}

/// Both sides of (X/Y)_c ≅ X_c/Y_c at the element x + iy.
pub fn complex_quotient_norms(
    space: &OpSpace,
    subspace: &[Vec<f64>],
    x: &MatElem,
    y: &MatElem,
    opts: &QuotientOptions,
) -> Result<ComplexQuotient> {
    let xc = super::complexify_space(space)?;
    let d = space.dim();
    let yc: Vec<Vec<f64>> = subspace
        .iter()
        .flat_map(|v| {
            let mut re = v.clone();
            re.extend(std::iter::repeat_n(0.0, d));
            let mut im = vec![0.0; d];
            im.extend_from_slice(v);
            [re, im]
        })
        .collect();
    let a = quotient_level_norm(&xc, &yc, &super::complex_elem(x, y)?, opts)?;
    let b = quotient_level_norm(space, subspace, &MatElem::complex_block(x, y), opts)?;
    Ok(ComplexQuotient {
        gap: (a.value - b.value).abs(),
        quotient_of_complexification: a,
        complexification_of_quotient: b,
    })
}
