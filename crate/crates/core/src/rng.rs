//! Seeded random streams.
//!
//! Every randomized routine takes an explicit 64-bit seed and derives one
//! independent stream per (seed, index) pair, so multistart searches give the
//! same answer whether restarts run sequentially or on a thread pool.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::Mat;

pub type Stream = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a list of indices into a seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix(seed), |acc, &i| {
        splitmix(acc ^ splitmix(i.wrapping_add(0x5851_F42D)))
    })
}

pub fn stream(seed: u64, path: &[u64]) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}

pub fn gaussian(rng: &mut Stream) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_vec(rng: &mut Stream, len: usize) -> Vec<f64> {
    (0..len).map(|_| gaussian(rng)).collect()
}

pub fn gaussian_mat(rng: &mut Stream, rows: usize, cols: usize) -> Mat {
    Mat::from_vec(rows, cols, gaussian_vec(rng, rows * cols)).expect("finite gaussian draw")
}

pub fn uniform(rng: &mut Stream, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

pub fn coin(rng: &mut Stream) -> bool {
    rng.random_bool(0.5)
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn orthogonal(rng: &mut Stream, m: usize) -> Mat {
    let g = gaussian_mat(rng, m, m);
    crate::linalg::gram_schmidt_columns(&g)
}

/// Haar unitary, returned in its real 2m x 2m realization [[A, -B], [B, A]].
pub fn unitary_realized(rng: &mut Stream, m: usize) -> Mat {
    // Gram-Schmidt over C on complex Gaussian columns.
    let mut re = gaussian_mat(rng, m, m);
    let mut im = gaussian_mat(rng, m, m);
    for j in 0..m {
        for k in 0..j {
            // <q_k, v_j> = sum conj(q_k) v_j
            let (mut pr, mut pi) = (0.0, 0.0);
            for i in 0..m {
                let (qr, qi) = (re[(i, k)], im[(i, k)]);
                let (vr, vi) = (re[(i, j)], im[(i, j)]);
                pr += qr * vr + qi * vi;
                pi += qr * vi - qi * vr;
            }
            for i in 0..m {
                let (qr, qi) = (re[(i, k)], im[(i, k)]);
                re[(i, j)] -= pr * qr - pi * qi;
                im[(i, j)] -= pr * qi + pi * qr;
            }
        }
        let norm = (0..m)
            .map(|i| re[(i, j)].powi(2) + im[(i, j)].powi(2))
            .sum::<f64>()
            .sqrt();
        for i in 0..m {
            re[(i, j)] /= norm;
            im[(i, j)] /= norm;
        }
    }
    crate::linalg::complex_realize(&re, &im)
}
