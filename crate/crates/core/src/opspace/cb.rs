//! Lower bounds for ‖u_n‖ by multistart ascent on the ratio ‖R(u_n c)‖ / ‖R(c)‖.
//!
//! The ratio is scale invariant, so iterates live on the unit sphere of
//! coefficient space; the gradient comes from the top singular pair of each
//! realization. Every returned value is attained by the stored witness, so it
//! is a valid lower bound regardless of how well the ascent converged.

use rayon::prelude::*;
use serde::Serialize;

use super::{CBMap, MatElem, OpSpace};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::rng;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CbOptions {
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for CbOptions {
    fn default() -> Self {
        CbOptions {
            restarts: 32,
            iters: 500,
            seed: 0xC0FFEE,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CbEstimate {
    pub level: usize,
    /// Best ratio found at this level or, padded with zeros, at a lower one.
    pub value: f64,
    /// Level at which the best witness was found.
    pub attained_level: usize,
    pub witness: MatElem,
}

/// One side of a ratio: the norm of `R_space(map · c)` (identity when `map` is `None`).
#[derive(Clone, Copy)]
pub(crate) struct RatioTerm<'a> {
    pub space: &'a OpSpace,
    pub map: Option<&'a Mat>,
}

impl RatioTerm<'_> {
    fn value(&self, c: &MatElem) -> f64 {
        let y = match self.map {
            Some(m) => c.map_entries(m),
            None => c.clone(),
        };
        linalg::spectral_norm(&self.space.realize_unchecked(&y))
    }

    fn value_grad(&self, c: &MatElem) -> (f64, Vec<f64>) {
        let n = c.level();
        let y = match self.map {
            Some(m) => c.map_entries(m),
            None => c.clone(),
        };
        let (s, u, v) = linalg::top_singular(&self.space.realize_unchecked(&y));
        let gy = self.space.bilinear_gradient(n, &u, &v);
        let g = match self.map {
            None => gy,
            Some(m) => {
                let dy = m.rows();
                let mt = m.transpose();
                gy.chunks(dy).flat_map(|e| mt.matvec(e)).collect()
            }
        };
        (s, g)
    }
}

fn ratio_value(num: &RatioTerm, den: &RatioTerm, c: &MatElem) -> f64 {
    let d = den.value(c);
    if d == 0.0 {
        0.0
    } else {
        num.value(c) / d
    }
}

fn ratio_value_grad(num: &RatioTerm, den: &RatioTerm, c: &MatElem) -> (f64, Vec<f64>) {
    let (sd, gd) = den.value_grad(c);
    if sd == 0.0 {
        return (0.0, vec![0.0; c.coeffs().len()]);
    }
    let (sn, gn) = num.value_grad(c);
    let g = gn
        .iter()
        .zip(&gd)
        .map(|(a, b)| (a * sd - sn * b) / (sd * sd))
        .collect();
    (sn / sd, g)
}

fn normalized(c: &MatElem) -> MatElem {
    let n = c.coeffs().iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        c.clone()
    } else {
        c.scale(1.0 / n)
    }
}

/// Armijo-backtracking ascent of num/den from `start`; returns the best point seen.
pub(crate) fn ratio_ascent(
    num: &RatioTerm,
    den: &RatioTerm,
    start: &MatElem,
    iters: usize,
) -> (f64, MatElem) {
    let mut c = normalized(start);
    let (mut f, mut g) = ratio_value_grad(num, den, &c);
    let mut step = 1.0;
    let mut stalls = 0;
    for _ in 0..iters {
        let gn2: f64 = g.iter().map(|x| x * x).sum();
        if gn2 < 1e-28 {
            break;
        }
        let mut t = step;
        let mut moved = None;
        for _ in 0..60 {
            let trial = MatElem::from_flat(
                c.level(),
                c.dim(),
                c.coeffs().iter().zip(&g).map(|(a, b)| a + t * b).collect(),
            );
            let trial = normalized(&trial);
            let ft = ratio_value(num, den, &trial);
            if ft >= f + 1e-4 * t * gn2 {
                moved = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((next, fnext)) = moved else { break };
        let gain = fnext - f;
        c = next;
        let (fv, gv) = ratio_value_grad(num, den, &c);
        f = fv;
        g = gv;
        step = (t * 2.0).min(1e6);
        if gain <= 1e-15 * f.abs().max(1e-300) {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    (f, c)
}

/// max ℓ^T t subject to ‖Σ t_j G_j‖ <= 1, by a log-det barrier on
/// [[I, A(t)], [A(t)^T, I]] ⪰ 0. Returns a strictly feasible near-maximizer.
fn max_linear_on_ball(gens: &[Mat], ell: &[f64]) -> Vec<f64> {
    let m = gens.len();
    let (r, c) = gens[0].shape();
    let big = r + c;
    let fgens: Vec<Mat> = gens
        .iter()
        .map(|g| {
            let mut f = Mat::zeros(big, big);
            f.set_block(0, r, g);
            f.set_block(r, 0, &g.transpose());
            f
        })
        .collect();
    let lmi = |t: &[f64]| {
        let mut f = Mat::identity(big);
        for (fg, &tj) in fgens.iter().zip(t) {
            if tj != 0.0 {
                f.axpy(tj, fg);
            }
        }
        f
    };
    let phi = |tau: f64, t: &[f64]| -> Option<f64> {
        let l = linalg::cholesky(&lmi(t))?;
        let logdet: f64 = (0..big).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0;
        let lin: f64 = ell.iter().zip(t).map(|(a, b)| a * b).sum();
        Some(-tau * lin - logdet)
    };
    let ell_norm = ell.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut t = vec![0.0; m];
    if ell_norm == 0.0 {
        return t;
    }
    let mut tau = 1.0 / ell_norm;
    let mut steps = 0;
    'outer: loop {
        loop {
            if steps >= 600 {
                break 'outer;
            }
            steps += 1;
            let Some(l) = linalg::cholesky(&lmi(&t)) else {
                break 'outer;
            };
            let finv = linalg::cholesky_inverse(&l);
            let ks: Vec<Mat> = fgens.iter().map(|fg| finv.matmul(fg)).collect();
            let kts: Vec<Mat> = ks.iter().map(Mat::transpose).collect();
            let grad: Vec<f64> = (0..m).map(|j| -tau * ell[j] - ks[j].trace()).collect();
            let mut h = Mat::zeros(m, m);
            for a in 0..m {
                for b in a..m {
                    let v = ks[a].dot(&kts[b]);
                    h[(a, b)] = v;
                    h[(b, a)] = v;
                }
            }
            let maxdiag = (0..m).map(|i| h[(i, i)]).fold(0.0, f64::max);
            let mut ridge = 1e-13 * maxdiag;
            let lh = loop {
                let mut hr = h.clone();
                for i in 0..m {
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
            if -slope / 2.0 < 1e-12 {
                break;
            }
            let p0 = phi(tau, &t).expect("interior iterate");
            let mut alpha = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let t2: Vec<f64> = t.iter().zip(&dz).map(|(a, b)| a + alpha * b).collect();
                if let Some(p2) = phi(tau, &t2) {
                    if p2 <= p0 + 0.25 * alpha * slope {
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
        let lin: f64 = ell.iter().zip(&t).map(|(a, b)| a * b).sum();
        if big as f64 / tau <= 1e-13 * lin.abs().max(ell_norm * 1e-300) {
            break;
        }
        if t.iter().any(|x| x.abs() > 1e12) {
            break;
        }
        tau *= 10.0;
    }
    t
}

/// Refines a witness by alternating between the top singular pair of the
/// numerator and an exact maximization of that linear functional over the
/// denominator's unit ball. Never decreases the ratio.
pub(crate) fn ratio_polish(
    num: &RatioTerm,
    den: &RatioTerm,
    start: (f64, MatElem),
    rounds: usize,
) -> (f64, MatElem) {
    let (mut best, mut c) = start;
    if best <= 0.0 {
        return (best, c);
    }
    let (n, d) = (c.level(), c.dim());
    let gens: Vec<Mat> = (0..n * n * d)
        .map(|idx| {
            let mut e = MatElem::zeros(n, d);
            e.coeffs_mut()[idx] = 1.0;
            let y = match den.map {
                Some(m) => e.map_entries(m),
                None => e,
            };
            den.space.realize_unchecked(&y)
        })
        .collect();
    for _ in 0..rounds {
        let (_, ell) = num.value_grad(&c);
        let t = max_linear_on_ball(&gens, &ell);
        let cand = MatElem::from_flat(n, d, t);
        let f = ratio_value(num, den, &cand);
        if f.is_finite() && f > best {
            let gain = f - best;
            best = f;
            c = normalized(&cand);
            if gain <= 1e-15 * best {
                break;
            }
        } else {
            break;
        }
    }
    (best, c)
}

/// Multistart search at one level; restart r uses the stream (seed, tag, level, r).
/// Ties keep the lowest restart index so the result does not depend on scheduling.
pub(crate) fn ratio_search(
    num: &RatioTerm,
    den: &RatioTerm,
    dim: usize,
    level: usize,
    opts: &CbOptions,
    tag: u64,
) -> (f64, MatElem) {
    let results: Vec<(f64, MatElem)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut s = rng::stream(opts.seed, &[tag, level as u64, r as u64]);
            let mut c =
                MatElem::from_flat(level, dim, rng::gaussian_vec(&mut s, level * level * dim));
            let jitter = rng::gaussian_vec(&mut s, level * level * dim);
            c = c.add(&MatElem::from_flat(level, dim, jitter).scale(1e-8));
            ratio_ascent(num, den, &c, opts.iters)
        })
        .collect();
    let mut best = (0.0, MatElem::zeros(level, dim));
    for (v, w) in results {
        if v > best.0 {
            best = (v, w);
        }
    }
    ratio_polish(num, den, best, 30)
}

/// Running-maximum profile of level-wise lower bounds for levels 1..=max_level.
/// A witness found at level k is padded with zeros to serve at every higher
/// level, so the profile is nondecreasing.
pub(crate) fn ratio_profile(
    num: &RatioTerm,
    den: &RatioTerm,
    dim: usize,
    max_level: usize,
    opts: &CbOptions,
    tag: u64,
) -> Vec<CbEstimate> {
    let mut out: Vec<CbEstimate> = Vec::with_capacity(max_level);
    for level in 1..=max_level {
        let (v, w) = ratio_search(num, den, dim, level, opts, tag);
        let est = match out.last() {
            Some(prev) if prev.value >= v => CbEstimate {
                level,
                value: prev.value,
                attained_level: prev.attained_level,
                witness: prev.witness.pad_to(level),
            },
            _ => CbEstimate {
                level,
                value: v,
                attained_level: level,
                witness: w,
            },
        };
        out.push(est);
    }
    out
}

pub fn cb_profile(u: &CBMap, max_level: usize, opts: &CbOptions) -> Result<Vec<CbEstimate>> {
    if max_level == 0 {
        return Err(Error::Invalid("level must be at least 1".into()));
    }
    let num = RatioTerm {
        space: u.codomain(),
        map: Some(u.matrix()),
    };
    let den = RatioTerm {
        space: u.domain(),
        map: None,
    };
    Ok(ratio_profile(
        &num,
        &den,
        u.domain().dim(),
        max_level,
        opts,
        0,
    ))
}

/// Certified lower bound for ‖u_n‖.
pub fn level_cb_norm_lower(u: &CBMap, level: usize, opts: &CbOptions) -> Result<CbEstimate> {
    Ok(cb_profile(u, level, opts)?.pop().expect("nonempty profile"))
}

/// Largest ‖u_n(x)‖ / ‖x‖ over Gaussian samples, without ascent.
pub fn sampled_level_ratio(u: &CBMap, level: usize, samples: usize, seed: u64) -> Result<f64> {
    let mut best: f64 = 0.0;
    for s in 0..samples {
        let mut r = rng::stream(seed, &[level as u64, s as u64]);
        let x = u.domain().random_elem(level, &mut r);
        best = best.max(u.level_ratio(&x)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quick() -> CbOptions {
        CbOptions {
            restarts: 8,
            iters: 200,
            seed: 7,
        }
    }

    #[test]
    fn identity_and_scaling() {
        let m2 = OpSpace::full(2, 2);
        let id = level_cb_norm_lower(&CBMap::identity(&m2), 2, &quick()).unwrap();
        assert_abs_diff_eq!(id.value, 1.0, epsilon = 1e-9);
        for n in 1..=3 {
            let two = level_cb_norm_lower(&CBMap::scaling(&m2, 2.0), n, &quick()).unwrap();
            assert_abs_diff_eq!(two.value, 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn transpose_map_reaches_two_at_level_two() {
        let m2 = OpSpace::full(2, 2);
        let t = CBMap::from_ambient_fn(&m2, Mat::transpose).unwrap();
        // oracle: the swap element [e_ji] has norm 1 and its image [e_ij] has norm 2
        let mut w = MatElem::zeros(2, 4);
        for i in 0..2 {
            for j in 0..2 {
                w.entry_mut(i, j)[j * 2 + i] = 1.0;
            }
        }
        assert_abs_diff_eq!(t.level_ratio(&w).unwrap(), 2.0, epsilon = 1e-12);
        let est = level_cb_norm_lower(&t, 2, &quick()).unwrap();
        assert!(est.value >= 2.0 - 1e-6, "{}", est.value);
        assert!(est.value <= 2.0 + 1e-9);
        let lvl1 = level_cb_norm_lower(&t, 1, &quick()).unwrap();
        assert_abs_diff_eq!(lvl1.value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn profile_is_monotone_and_witnessed() {
        let m2 = OpSpace::full(2, 2);
        let mut r = rng::stream(3, &[]);
        let m = rng::gaussian_mat(&mut r, 4, 4);
        let u = CBMap::new(m2.clone(), m2.clone(), m).unwrap();
        let prof = cb_profile(&u, 3, &quick()).unwrap();
        for w in prof.windows(2) {
            assert!(w[1].value >= w[0].value);
        }
        for est in &prof {
            let again = u.level_ratio(&est.witness).unwrap();
            assert_abs_diff_eq!(again, est.value, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_map_gives_zero() {
        let m2 = OpSpace::full(2, 2);
        let est = level_cb_norm_lower(&CBMap::scaling(&m2, 0.0), 2, &quick()).unwrap();
        assert_eq!(est.value, 0.0);
    }
}
