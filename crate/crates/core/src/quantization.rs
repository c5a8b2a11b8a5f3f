//! Minimal and maximal quantizations of finite-dimensional real Banach spaces
//! whose dual ball is a polytope, and the w₂ complexification norm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::linalg::{self, Mat};
use crate::opspace::{MatElem, OpSpace};
use crate::rng;
use crate::search::{kron_sum, kron_sum_grad, orthogonal_ascent, signed_permutations};

const RANK_TOL: f64 = 1e-10;

/// A real Banach space ℝ^d normed by ‖x‖ = max_f |⟨f, x⟩| over a finite
/// symmetric family of functionals. Only one representative of each ±f pair
/// is stored: the lexicographically larger one, in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct BanachSpace {
    dim: usize,
    reps: Vec<Vec<f64>>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl BanachSpace {
    /// Builds the space from any list of functionals; the list is symmetrized.
    pub fn new(dim: usize, functionals: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("dimension must be positive".into()));
        }
        let mut reps: Vec<Vec<f64>> = Vec::new();
        for (i, f) in functionals.into_iter().enumerate() {
            if f.len() != dim {
                return Err(shape_err(
                    format!("{dim} entries per functional"),
                    format!("{} in functional {i}", f.len()),
                ));
            }
            if let Some(j) = f.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
            if f.iter().all(|&x| x == 0.0) {
                continue;
            }
            // +0.0 for exact zeros so that -0.0 never leaks into comparisons
            let neg: Vec<f64> = f.iter().map(|x| if *x == 0.0 { 0.0 } else { -x }).collect();
            let pos: Vec<f64> = f.iter().map(|x| if *x == 0.0 { 0.0 } else { *x }).collect();
            let rep = if lex_cmp(&pos, &neg).is_ge() {
                pos
            } else {
                neg
            };
            reps.push(rep);
        }
        reps.sort_by(|a, b| lex_cmp(b, a));
        reps.dedup();
        let m = Mat::from_rows(&reps).unwrap_or_else(|_| Mat::zeros(0, dim));
        let r = if reps.is_empty() {
            0
        } else {
            linalg::rank(&m, RANK_TOL)
        };
        if r < dim {
            let s = if reps.is_empty() {
                0.0
            } else {
                linalg::singular_values(&m)
                    .get(dim - 1)
                    .copied()
                    .unwrap_or(0.0)
            };
            return Err(Error::RankDeficient {
                smallest: s,
                threshold: RANK_TOL,
            });
        }
        Ok(BanachSpace { dim, reps })
    }

    /// ℓ∞_d, equivalently C(K, ℝ) for a d-point K.
    pub fn ell_inf(dim: usize) -> Self {
        let fs = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        BanachSpace::new(dim, fs).expect("coordinate functionals span")
    }

    /// ℓ¹_d, normed by the 2^d sign vectors.
    pub fn ell_one(dim: usize) -> Self {
        let fs = (0..1u64 << dim)
            .map(|mask| {
                (0..dim)
                    .map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        BanachSpace::new(dim, fs).expect("sign vectors span")
    }

    pub fn real_line() -> Self {
        BanachSpace::new(1, vec![vec![1.0]]).expect("nonzero functional")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// One representative per ±pair.
    pub fn representatives(&self) -> &[Vec<f64>] {
        &self.reps
    }

    /// The full symmetric family F.
    pub fn functionals(&self) -> Vec<Vec<f64>> {
        let mut out = self.reps.clone();
        out.extend(self.reps.iter().map(|f| f.iter().map(|x| -x).collect()));
        out
    }

    fn check_vec(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(shape_err(
                format!("vector of length {}", self.dim),
                format!("{}", x.len()),
            ));
        }
        if let Some(j) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: 0, col: j });
        }
        Ok(())
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        self.check_vec(x)?;
        Ok(self
            .reps
            .iter()
            .map(|f| dot(f, x).abs())
            .fold(0.0, f64::max))
    }

    /// The scalar n x n matrix [⟨f, x_ij⟩].
    fn pair(f: &[f64], x: &MatElem) -> Mat {
        let n = x.level();
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = dot(f, x.entry(i, j));
            }
        }
        m
    }

    fn check_elem(&self, x: &MatElem) -> Result<()> {
        if x.dim() != self.dim {
            return Err(shape_err(
                format!("{} coefficients per entry", self.dim),
                format!("{}", x.dim()),
            ));
        }
        if x.coeffs().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct BanachJson {
    dim: usize,
    functionals: Vec<Vec<f64>>,
}

impl Serialize for BanachSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BanachJson {
            dim: self.dim,
            functionals: self.functionals(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BanachSpace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = BanachJson::deserialize(d)?;
        BanachSpace::new(j.dim, j.functionals).map_err(serde::de::Error::custom)
    }
}

/// ‖x‖ in M_n(Min E): max over f of ‖[⟨f, x_ij⟩]‖.
pub fn min_level_norm(e: &BanachSpace, x: &MatElem) -> Result<f64> {
    e.check_elem(x)?;
    Ok(e.reps
        .iter()
        .map(|f| linalg::spectral_norm(&BanachSpace::pair(f, x)))
        .fold(0.0, f64::max))
}

/// Min E as a space of diagonal matrices, one diagonal slot per functional.
pub fn realize_min(e: &BanachSpace) -> OpSpace {
    let k = e.reps.len();
    let basis = (0..e.dim)
        .map(|c| Mat::diag(&e.reps.iter().map(|f| f[c]).collect::<Vec<_>>()))
        .collect();
    OpSpace::new(k, k, basis).expect("functionals span the dual")
}

/// ‖x + iy‖ = max over f of |⟨f, x⟩ + i⟨f, y⟩|.
pub fn w2_complex_norm(e: &BanachSpace, x: &[f64], y: &[f64]) -> Result<f64> {
    e.check_vec(x)?;
    e.check_vec(y)?;
    Ok(e.reps
        .iter()
        .map(|f| dot(f, x).hypot(dot(f, y)))
        .fold(0.0, f64::max))
}

/// Largest deviation, over seeded samples at levels 1..=max_level, between the
/// complexification of Min E and the minimal norm of E_c computed from the
/// functionals f + i0.
pub fn min_complexification_check(
    e: &BanachSpace,
    max_level: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let space = realize_min(e);
    let d = e.dim;
    let mut worst: f64 = 0.0;
    for n in 1..=max_level {
        for s in 0..samples {
            let mut r = rng::stream(seed, &[n as u64, s as u64]);
            let x = MatElem::from_flat(n, d, rng::gaussian_vec(&mut r, n * n * d));
            let y = MatElem::from_flat(n, d, rng::gaussian_vec(&mut r, n * n * d));
            let lhs = crate::opspace::complexification_norm(&space, &x, &y)?;
            let rhs = e
                .reps
                .iter()
                .map(|f| {
                    let re = BanachSpace::pair(f, &x);
                    let im = BanachSpace::pair(f, &y);
                    linalg::spectral_norm(&linalg::complex_realize(&re, &im))
                })
                .fold(0.0, f64::max);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxL1Bounds {
    pub lower: f64,
    pub upper: f64,
    pub attained_m: usize,
    /// Contractions D_k with ‖Σ a_k ⊗ D_k‖ = lower.
    pub witness: Vec<Mat>,
    pub m_max: usize,
    pub restarts: usize,
    pub seed: u64,
}

/// Largest number of signed-permutation tuples enumerated exhaustively per m.
const ENUMERATION_CAP: usize = 4096;

/// Bounds for the norm of Σ a_k ⊗ e_k in M_n(Max ℓ¹_d), which equals
/// sup ‖Σ a_k ⊗ D_k‖ over contractions D_k of every size m.
pub fn max_l1_norm_bounds(
    coeffs: &[Mat],
    m_max: usize,
    restarts: usize,
    seed: u64,
) -> Result<MaxL1Bounds> {
    let Some(first) = coeffs.first() else {
        return Err(Error::Invalid(
            "at least one coefficient matrix is required".into(),
        ));
    };
    if !first.is_square() {
        return Err(Error::NotSquare {
            rows: first.rows(),
            cols: first.cols(),
        });
    }
    for a in coeffs {
        if a.shape() != first.shape() {
            return Err(shape_err(
                format!("{}x{}", first.rows(), first.cols()),
                format!("{}x{}", a.rows(), a.cols()),
            ));
        }
        a.check_finite()?;
    }
    if m_max == 0 {
        return Err(Error::Invalid("m_max must be at least 1".into()));
    }
    let d = coeffs.len();
    let upper: f64 = coeffs.iter().map(linalg::spectral_norm).sum();
    let value = |ds: &[Mat]| linalg::spectral_norm(&kron_sum(coeffs, ds));
    let ascend = |start: Vec<Mat>| {
        orthogonal_ascent(start, 200, value, |ds: &[Mat]| kron_sum_grad(coeffs, ds))
    };

    let mut best = (f64::NEG_INFINITY, 0usize, Vec::new());
    for m in 1..=m_max {
        let perms = signed_permutations(m);
        let total = (perms.len() as u128).checked_pow(d as u32);
        let mut candidates: Vec<(f64, Vec<Mat>)> = Vec::new();
        if let Some(total) = total.filter(|&t| t <= ENUMERATION_CAP as u128) {
            let total = total as usize;
            let scored: Vec<(f64, Vec<Mat>)> = (0..total)
                .into_par_iter()
                .map(|mut idx| {
                    let tuple: Vec<Mat> = (0..d)
                        .map(|_| {
                            let q = perms[idx % perms.len()].clone();
                            idx /= perms.len();
                            q
                        })
                        .collect();
                    (value(&tuple), tuple)
                })
                .collect();
            let mut top = (f64::NEG_INFINITY, Vec::new());
            for (v, t) in scored {
                if v > top.0 {
                    top = (v, t);
                }
            }
            candidates.push(top.clone());
            candidates.push(ascend(top.1));
        }
        let runs: Vec<(f64, Vec<Mat>)> = (0..restarts)
            .into_par_iter()
            .map(|r| {
                let mut s = rng::stream(seed, &[m as u64, r as u64]);
                let start = (0..d).map(|_| rng::orthogonal(&mut s, m)).collect();
                ascend(start)
            })
            .collect();
        candidates.extend(runs);
        for (v, w) in candidates {
            if v > best.0 {
                best = (v, m, w);
            }
        }
    }
    Ok(MaxL1Bounds {
        lower: best.0,
        upper,
        attained_m: best.1,
        witness: best.2,
        m_max,
        restarts,
        seed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantizationComparison {
    /// ‖Σ a_k ⊗ e_k‖ in M_n(Min ℓ¹_d).
    pub min_norm: f64,
    pub max: MaxL1Bounds,
    /// max.lower - min_norm: a certified lower bound on the gap.
    pub gap: f64,
}

/// Compares the minimal and maximal structures on ℓ¹_d at the element
/// Σ a_k ⊗ e_k.
pub fn compare_l1_quantizations(
    coeffs: &[Mat],
    m_max: usize,
    restarts: usize,
    seed: u64,
) -> Result<QuantizationComparison> {
    let max = max_l1_norm_bounds(coeffs, m_max, restarts, seed)?;
    let e = BanachSpace::ell_one(coeffs.len());
    let x = MatElem::from_coefficient_matrices(coeffs)?;
    let min_norm = min_level_norm(&e, &x)?;
    Ok(QuantizationComparison {
        min_norm,
        gap: max.lower - min_norm,
        max,
    })
}

/// The pair (A, B) = (diag(1, -1), [[0, 1], [1, 0]]) in M_2(ℓ¹_2).
pub fn l12_pair() -> [Mat; 2] {
    [
        Mat::rows_of(&[[1.0, 0.0], [0.0, -1.0]]),
        Mat::rows_of(&[[0.0, 1.0], [1.0, 0.0]]),
    ]
}

pub const L12_MIN_GAP: f64 = 0.5;

/// Min and Max structures on ℓ¹_2 disagree at level 2: √2 against 2.
pub fn reproduce_l12_nonuniqueness(seed: u64) -> Result<QuantizationComparison> {
    let cmp = compare_l1_quantizations(&l12_pair(), 4, 64, seed)?;
    if cmp.gap < L12_MIN_GAP {
        return Err(Error::Precondition(format!(
            "expected a gap of at least {L12_MIN_GAP} between the max and min norms, found {}",
            cmp.gap
        )));
    }
    Ok(cmp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn representatives_are_canonical() {
        let l1 = BanachSpace::ell_one(2);
        assert_eq!(l1.representatives(), &[vec![1.0, 1.0], vec![1.0, -1.0]]);
        let li = BanachSpace::ell_inf(2);
        assert_eq!(li.representatives(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let dup =
            BanachSpace::new(2, vec![vec![0.0, -1.0], vec![-1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(dup, li);
        assert!(matches!(
            BanachSpace::new(2, vec![vec![1.0, 1.0], vec![-2.0, -2.0]]),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn min_norm_examples() {
        let li = BanachSpace::ell_inf(2);
        assert_eq!(
            min_level_norm(&li, &MatElem::scalar(vec![3.0, -4.0])).unwrap(),
            4.0
        );
        let [a, b] = l12_pair();
        let x = MatElem::from_coefficient_matrices(&[a, b]).unwrap();
        assert_abs_diff_eq!(
            min_level_norm(&BanachSpace::ell_one(2), &x).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-12
        );
        let y =
            MatElem::from_coefficient_matrices(&[Mat::identity(2), Mat::unit(2, 2, 0, 1)]).unwrap();
        assert_abs_diff_eq!(min_level_norm(&li, &y).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn realize_min_examples() {
        let s = realize_min(&BanachSpace::ell_one(2));
        assert_eq!(s.basis()[0], Mat::diag(&[1.0, 1.0]));
        assert_eq!(s.basis()[1], Mat::diag(&[1.0, -1.0]));
        let s = realize_min(&BanachSpace::ell_inf(2));
        assert_eq!(s.basis()[0], Mat::diag(&[1.0, 0.0]));
        assert_eq!(s.basis()[1], Mat::diag(&[0.0, 1.0]));
    }

    #[test]
    fn w2_examples() {
        let r = BanachSpace::real_line();
        assert_abs_diff_eq!(
            w2_complex_norm(&r, &[3.0], &[4.0]).unwrap(),
            5.0,
            epsilon = 1e-15
        );
        let li = BanachSpace::ell_inf(2);
        assert_eq!(w2_complex_norm(&li, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(
            w2_complex_norm(&li, &[1.0, -7.0], &[0.0, 0.0]).unwrap(),
            7.0
        );
    }

    #[test]
    fn min_complexification_examples() {
        assert!(min_complexification_check(&BanachSpace::real_line(), 3, 50, 1).unwrap() <= 1e-12);
        assert!(min_complexification_check(&BanachSpace::ell_inf(2), 3, 200, 2).unwrap() <= 1e-10);
        assert!(min_complexification_check(&BanachSpace::ell_one(2), 3, 200, 3).unwrap() <= 1e-10);
    }

    #[test]
    fn max_l1_examples() {
        let a = Mat::rows_of(&[[1.0, 2.0], [0.5, -1.0]]);
        let r = max_l1_norm_bounds(std::slice::from_ref(&a), 2, 4, 1).unwrap();
        assert_abs_diff_eq!(r.lower, linalg::spectral_norm(&a), epsilon = 1e-12);
        assert_abs_diff_eq!(r.upper, linalg::spectral_norm(&a), epsilon = 1e-12);

        let r = max_l1_norm_bounds(&[Mat::rows_of(&[[3.0]]), Mat::rows_of(&[[-2.0]])], 2, 4, 1)
            .unwrap();
        assert_abs_diff_eq!(r.lower, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.upper, 5.0, epsilon = 1e-12);

        let r = max_l1_norm_bounds(&l12_pair(), 2, 8, 1).unwrap();
        assert!(r.lower >= 2.0 - 1e-6);
        assert_abs_diff_eq!(r.upper, 2.0, epsilon = 1e-12);
        // the witness reproduces the lower bound
        let again = linalg::spectral_norm(&kron_sum(&l12_pair(), &r.witness));
        assert_eq!(again, r.lower);
    }

    #[test]
    fn nonuniqueness() {
        let rep = reproduce_l12_nonuniqueness(0xC0FFEE).unwrap();
        assert_abs_diff_eq!(rep.min_norm, 2f64.sqrt(), epsilon = 1e-9);
        assert!(rep.max.lower >= 2.0 - 1e-6 && rep.max.lower <= 2.0 + 1e-12);
        assert!(rep.gap >= 0.58);

        let [a, b] = l12_pair();
        let half = compare_l1_quantizations(&[a.scale(0.5), b.scale(0.5)], 2, 8, 1).unwrap();
        assert_abs_diff_eq!(half.min_norm, 2f64.sqrt() / 2.0, epsilon = 1e-12);
        assert!(half.max.lower >= 1.0 - 1e-6);

        let degenerate = compare_l1_quantizations(&[a.clone(), Mat::zeros(2, 2)], 2, 8, 1).unwrap();
        assert_abs_diff_eq!(degenerate.min_norm, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(degenerate.max.lower, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn refinement_is_monotone() {
        let mut r = rng::stream(5, &[]);
        let cs = vec![
            rng::gaussian_mat(&mut r, 2, 2),
            rng::gaussian_mat(&mut r, 2, 2),
        ];
        let small = max_l1_norm_bounds(&cs, 2, 4, 9).unwrap();
        let more_m = max_l1_norm_bounds(&cs, 3, 4, 9).unwrap();
        let more_r = max_l1_norm_bounds(&cs, 2, 8, 9).unwrap();
        assert!(more_m.lower >= small.lower);
        assert!(more_r.lower >= small.lower);
    }

    #[test]
    fn json_round_trip_symmetrizes() {
        let e: BanachSpace =
            serde_json::from_str(r#"{"dim":2,"functionals":[[1,1],[1,-1]]}"#).unwrap();
        assert_eq!(e, BanachSpace::ell_one(2));
        let back: BanachSpace = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }

    fn small_vec(d: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0..10.0f64, d)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn level_one_min_is_the_banach_norm(x in small_vec(3), which in 0..2usize) {
            let e = if which == 0 { BanachSpace::ell_one(3) } else { BanachSpace::ell_inf(3) };
            let a = min_level_norm(&e, &MatElem::scalar(x.clone())).unwrap();
            prop_assert!((a - e.norm(&x).unwrap()).abs() <= 1e-12 * (1.0 + a));
        }

        #[test]
        fn realization_matches_dual_formula(seed in any::<u64>(), n in 1..4usize) {
            let e = BanachSpace::ell_one(2);
            let mut r = rng::stream(seed, &[]);
            let x = MatElem::from_flat(n, 2, rng::gaussian_vec(&mut r, n * n * 2));
            let a = crate::opspace::level_norm(&realize_min(&e), &x).unwrap();
            let b = min_level_norm(&e, &x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
        }

        #[test]
        fn w2_is_conjugation_symmetric(x in small_vec(2), y in small_vec(2)) {
            let e = BanachSpace::ell_one(2);
            let ny: Vec<f64> = y.iter().map(|v| -v).collect();
            prop_assert_eq!(w2_complex_norm(&e, &x, &y).unwrap(), w2_complex_norm(&e, &x, &ny).unwrap());
        }

        #[test]
        fn max_bounds_are_ordered(seed in any::<u64>()) {
            let mut r = rng::stream(seed, &[]);
            let cs = vec![rng::gaussian_mat(&mut r, 2, 2), rng::gaussian_mat(&mut r, 2, 2)];
            let b = max_l1_norm_bounds(&cs, 2, 2, seed).unwrap();
            prop_assert!(b.lower <= b.upper + 1e-12);
        }
    }
}
