//! The canonical map θ: C* -> (C_r)*, θ(z)(w) = Re(w z̄), at matrix level n.
//!
//! θ_n([z_kl]) is a map C_r -> M_n(R); its norm is the sup over m and complex
//! contractions W in M_m(C) of the real (nm) x (nm) matrix whose (k, l) block is
//! Re(W z̄_kl) = Re(W) x_kl + Im(W) y_kl. The sup is attained at unitaries, which
//! are searched from seeded Haar starts plus the identity, refined by ascent on
//! the unitary group.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{shape_err, Error, Result};
use crate::linalg::{self, Mat};
use crate::rng;
use crate::search::{kron_sum, kron_sum_grad, orthogonal_ascent};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThetaOptions {
    pub m_max: usize,
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        ThetaOptions {
            m_max: 4,
            restarts: 64,
            iters: 200,
            seed: 0xC0FFEE,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaReport {
    pub value: f64,
    pub attained_m: usize,
    /// Largest value reached by any single restart, for every m.
    pub max_restart_value: f64,
    pub restarts_run: usize,
    pub witness_re: Mat,
    pub witness_im: Mat,
}

/// The real block matrix θ_n(z)(W) for W = w_re + i w_im.
pub fn theta_block(re: &Mat, im: &Mat, w_re: &Mat, w_im: &Mat) -> Mat {
    kron_sum(&[re.clone(), im.clone()], &[w_re.clone(), w_im.clone()])
}

fn split_realized(w: &Mat) -> (Mat, Mat) {
    let m = w.rows() / 2;
    (w.block(0, 0, m, m), w.block(m, 0, m, m))
}

pub fn theta_dual_norm_lower(re: &Mat, im: &Mat, opts: &ThetaOptions) -> Result<ThetaReport> {
    if !re.is_square() {
        return Err(Error::NotSquare {
            rows: re.rows(),
            cols: re.cols(),
        });
    }
    if re.shape() != im.shape() {
        return Err(shape_err(
            format!("{}x{}", re.rows(), re.cols()),
            format!("{}x{}", im.rows(), im.cols()),
        ));
    }
    re.check_finite()?;
    im.check_finite()?;
    if opts.m_max == 0 || opts.restarts == 0 {
        return Err(Error::Invalid("m_max and restarts must be positive".into()));
    }
    let coeffs = [re.clone(), im.clone()];
    let value = |ws: &[Mat]| {
        let (a, b) = split_realized(&ws[0]);
        linalg::spectral_norm(&kron_sum(&coeffs, &[a, b]))
    };
    let value_grad = |ws: &[Mat]| {
        let (a, b) = split_realized(&ws[0]);
        let (s, g) = kron_sum_grad(&coeffs, &[a, b]);
        (s, vec![linalg::complex_realize(&g[0], &g[1]).scale(0.5)])
    };

    let mut best = (f64::NEG_INFINITY, 0usize, Mat::zeros(1, 1));
    let mut max_restart: f64 = f64::NEG_INFINITY;
    for m in 1..=opts.m_max {
        let runs: Vec<(f64, Mat)> = (0..opts.restarts)
            .into_par_iter()
            .map(|r| {
                let start = if r == 0 {
                    Mat::identity(2 * m)
                } else {
                    let mut s = rng::stream(opts.seed, &[m as u64, r as u64]);
                    rng::unitary_realized(&mut s, m)
                };
                let (v, w) = orthogonal_ascent(vec![start], opts.iters, value, value_grad);
                (v, w.into_iter().next().expect("one variable"))
            })
            .collect();
        for (v, w) in runs {
            max_restart = max_restart.max(v);
            if v > best.0 {
                best = (v, m, w);
            }
        }
    }
    let (wr, wi) = split_realized(&best.2);
    Ok(ThetaReport {
        value: best.0,
        attained_m: best.1,
        max_restart_value: max_restart,
        restarts_run: opts.restarts * opts.m_max,
        witness_re: wr,
        witness_im: wi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small() -> ThetaOptions {
        ThetaOptions {
            m_max: 3,
            restarts: 8,
            iters: 100,
            seed: 11,
        }
    }

    #[test]
    fn level_one_is_modulus() {
        let r = theta_dual_norm_lower(&Mat::rows_of(&[[1.0]]), &Mat::rows_of(&[[0.0]]), &small())
            .unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-9);
        let r = theta_dual_norm_lower(&Mat::rows_of(&[[0.6]]), &Mat::rows_of(&[[0.8]]), &small())
            .unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_gives_zero() {
        let r = theta_dual_norm_lower(&Mat::zeros(2, 2), &Mat::zeros(2, 2), &small()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn row_example_is_one_not_sqrt_two() {
        let re = Mat::rows_of(&[[1.0, 0.0], [0.0, 0.0]]);
        let im = Mat::rows_of(&[[0.0, 1.0], [0.0, 0.0]]);
        let r = theta_dual_norm_lower(&re, &im, &small()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-6);
        assert!(r.max_restart_value <= 1.0 + 1e-6);
        // the witness reproduces the value
        let again = linalg::spectral_norm(&theta_block(&re, &im, &r.witness_re, &r.witness_im));
        assert_abs_diff_eq!(again, r.value, epsilon = 1e-12);
    }

    #[test]
    fn shape_errors() {
        assert!(theta_dual_norm_lower(&Mat::zeros(2, 2), &Mat::zeros(1, 1), &small()).is_err());
        assert!(theta_dual_norm_lower(&Mat::zeros(2, 1), &Mat::zeros(2, 1), &small()).is_err());
    }
}
