//! Complete left M-projections on concrete spaces.
//!
//! C₂(X) is the column space [X; X] in a 2p x q ambient (see
//! [`column_space`]). For a projection P on X:
//! ν_P(x) = [P(x); x - P(x)], μ_P([x; y]) = P(x) + y - P(y), and
//! τ_P([x; y]) = [P(x); y]. P is a complete left M-projection when ν_P is a
//! complete isometry; certification here is bounded by the levels and samples
//! actually examined.

use serde::Serialize;

use crate::error::{shape_err, Error, Result};
use crate::linalg::{self, Mat};
use crate::opspace::{
    column_space, complexify_map, complexify_space, level_cb_norm_lower, level_norm, ratio_ascent,
    ratio_polish, ratio_search, CBMap, CbEstimate, CbOptions, MatElem, OpSpace, RatioTerm,
};
use crate::rng;
use crate::systems::OpAlgebra;

pub const IDEMPOTENCY_TOL: f64 = 1e-10;
pub const MULTIPLIER_TOL: f64 = 1e-10;

/// An idempotent endomap P, checked at construction.
#[derive(Debug, Clone)]
pub struct Projection {
    map: CBMap,
    defect: f64,
}

impl Projection {
    pub fn new(map: CBMap) -> Result<Self> {
        if !map.is_endomap() {
            return Err(Error::Precondition(
                "a projection must map a space to itself".into(),
            ));
        }
        let m = map.matrix();
        let defect = m.matmul(m).max_abs_diff(m);
        if defect > IDEMPOTENCY_TOL {
            return Err(Error::NotIdempotent { defect });
        }
        Ok(Projection { map, defect })
    }

    pub fn map(&self) -> &CBMap {
        &self.map
    }

    pub fn space(&self) -> &OpSpace {
        self.map.domain()
    }

    /// max |(P²)_ij - P_ij| over the coefficient matrix.
    pub fn idempotency_defect(&self) -> f64 {
        self.defect
    }
}

/// The maps ν_P: X → C₂(X), μ_P: C₂(X) → X and τ_P: C₂(X) → C₂(X).
#[derive(Debug, Clone)]
pub struct NuMuTau {
    pub nu: CBMap,
    pub mu: CBMap,
    pub tau: CBMap,
}

pub fn build_nu_mu_tau(p: &Projection) -> NuMuTau {
    let x = p.space();
    let c2 = column_space(x);
    let d = x.dim();
    let pm = p.map.matrix();
    let comp = Mat::identity(d).sub(pm);
    let nu = pm.vstack(&comp);
    let mu = pm.hstack(&comp);
    let tau = pm.direct_sum(&Mat::identity(d));
    NuMuTau {
        nu: CBMap::new(x.clone(), c2.clone(), nu).expect("shapes agree"),
        mu: CBMap::new(c2.clone(), x.clone(), mu).expect("shapes agree"),
        tau: CBMap::new(c2.clone(), c2, tau).expect("shapes agree"),
    }
}

/// τ_u([x; y]) = [u(x); y] on C₂(X) for any endomap u.
pub fn tau_map(u: &CBMap) -> Result<CBMap> {
    if !u.is_endomap() {
        return Err(Error::Precondition("τ_u needs an endomap".into()));
    }
    let c2 = column_space(u.domain());
    let m = u.matrix().direct_sum(&Mat::identity(u.domain().dim()));
    CBMap::new(c2.clone(), c2, m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// ‖ν_P(x)‖ = ‖x‖
    NuIsometry,
    /// ‖μ_P‖_n ≤ 1
    MuContraction,
    /// ‖τ_P‖_n ≤ 1
    TauContraction,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedAtLevels {
        levels: usize,
    },
    Refuted {
        check: Check,
        level: usize,
        witness: MatElem,
        /// ‖T(w)‖ / ‖w‖ for the map T under test.
        observed: f64,
        expected: f64,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Certification {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub levels_checked: usize,
    pub samples: usize,
    pub restarts: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Largest |ratio - 1| (ν) or ratio - 1 (μ, τ) seen at any checked level.
    pub max_deviation: f64,
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        matches!(self.verdict, Verdict::CertifiedAtLevels { .. })
    }

    /// Recomputes the observed ratio of a refutation from its stored witness.
    pub fn reverify(&self, p: &Projection) -> Result<Option<f64>> {
        let Verdict::Refuted { check, witness, .. } = &self.verdict else {
            return Ok(None);
        };
        let maps = build_nu_mu_tau(p);
        let map = match check {
            Check::NuIsometry => &maps.nu,
            Check::MuContraction => &maps.mu,
            Check::TauContraction => &maps.tau,
        };
        Ok(Some(map.level_ratio(witness)?))
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CertifyOptions {
    pub max_level: usize,
    pub samples: usize,
    /// Ascent refinements of ν, and restarts of the μ, τ searches, per level.
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            max_level: 3,
            samples: 200,
            restarts: 16,
            seed: 0xC0FFEE,
            tol: 1e-9,
        }
    }
}

const TAG_SAMPLE: u64 = 11;
const TAG_MU: u64 = 12;
const TAG_TAU: u64 = 13;

/// Searches levels 1..=max_level for a failure of ν_P to be isometric or of
/// μ_P, τ_P to be contractive. Probes at each level, in order: the units
/// E_11 ⊗ B_k, Gaussian samples, then ascent refinements of the most extreme
/// samples. The first probe that violates the tolerance is the witness.
pub fn certify_left_m_projection(p: &Projection, opts: &CertifyOptions) -> Result<Certification> {
    if opts.tol.is_nan() || opts.tol < 0.0 {
        return Err(Error::Invalid("tolerance must be nonnegative".into()));
    }
    let x = p.space();
    let maps = build_nu_mu_tau(p);
    let c2 = maps.nu.codomain().clone();
    let d = x.dim();
    let up = (
        RatioTerm {
            space: &c2,
            map: Some(maps.nu.matrix()),
        },
        RatioTerm {
            space: x,
            map: None,
        },
    );
    let down = (up.1, up.0);
    let mut worst: f64 = 0.0;
    let done = |verdict: Verdict, levels: usize, worst: f64| Certification {
        verdict,
        levels_checked: levels,
        samples: opts.samples,
        restarts: opts.restarts,
        tolerance: opts.tol,
        seed: opts.seed,
        max_deviation: worst,
    };
    if opts.max_level == 0 {
        return Ok(done(
            Verdict::Inconclusive {
                reason: "no levels requested".into(),
            },
            0,
            0.0,
        ));
    }

    for n in 1..=opts.max_level {
        let mut probes: Vec<MatElem> = (0..d).map(|k| MatElem::basis_unit(n, d, 0, 0, k)).collect();
        for s in 0..opts.samples {
            let mut r = rng::stream(opts.seed, &[TAG_SAMPLE, n as u64, s as u64]);
            probes.push(MatElem::from_flat(
                n,
                d,
                rng::gaussian_vec(&mut r, n * n * d),
            ));
        }
        let mut scored: Vec<(f64, usize)> = Vec::with_capacity(probes.len());
        for (i, w) in probes.iter().enumerate() {
            let ratio = maps.nu.level_ratio(w)?;
            if level_norm(x, w)? == 0.0 {
                continue;
            }
            let dev = (ratio - 1.0).abs();
            worst = worst.max(dev);
            if dev > opts.tol {
                return Ok(done(
                    Verdict::Refuted {
                        check: Check::NuIsometry,
                        level: n,
                        witness: w.clone(),
                        observed: ratio,
                        expected: 1.0,
                    },
                    n,
                    worst,
                ));
            }
            scored.push((ratio, i));
        }
        // refine the samples with the largest and smallest ratios
        let half = opts.restarts.div_ceil(2);
        let mut by_ratio = scored.clone();
        by_ratio.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let starts = by_ratio.iter().take(half).map(|&(_, i)| (true, i)).chain(
            by_ratio
                .iter()
                .rev()
                .take(opts.restarts - half)
                .map(|&(_, i)| (false, i)),
        );
        for (grow, i) in starts {
            let (num, den) = if grow { up } else { down };
            let found = ratio_ascent(&num, &den, &probes[i], 500);
            let (_, w) = ratio_polish(&num, &den, found, 10);
            let ratio = maps.nu.level_ratio(&w)?;
            let dev = (ratio - 1.0).abs();
            worst = worst.max(dev);
            if dev > opts.tol {
                return Ok(done(
                    Verdict::Refuted {
                        check: Check::NuIsometry,
                        level: n,
                        witness: w,
                        observed: ratio,
                        expected: 1.0,
                    },
                    n,
                    worst,
                ));
            }
        }

        let cb = CbOptions {
            restarts: opts.restarts,
            iters: 500,
            seed: opts.seed,
        };
        for (check, map, tag) in [
            (Check::MuContraction, &maps.mu, TAG_MU),
            (Check::TauContraction, &maps.tau, TAG_TAU),
        ] {
            let num = RatioTerm {
                space: map.codomain(),
                map: Some(map.matrix()),
            };
            let den = RatioTerm {
                space: map.domain(),
                map: None,
            };
            let (_, w) = ratio_search(&num, &den, map.domain().dim(), n, &cb, tag);
            let ratio = map.level_ratio(&w)?;
            worst = worst.max(ratio - 1.0);
            if ratio > 1.0 + opts.tol {
                return Ok(done(
                    Verdict::Refuted {
                        check,
                        level: n,
                        witness: w,
                        observed: ratio,
                        expected: 1.0,
                    },
                    n,
                    worst,
                ));
            }
        }
    }
    Ok(done(
        Verdict::CertifiedAtLevels {
            levels: opts.max_level,
        },
        opts.max_level,
        worst,
    ))
}

/// Coordinates implementing C₂(X)_c ≅ C₂(X_c).
#[derive(Debug, Clone, Serialize)]
pub struct ShuffleCertificate {
    /// Coefficient k of C₂(X)_c becomes coefficient perm[k] of C₂(X_c).
    pub coeff_perm: Vec<usize>,
    /// Row r of a realization in C₂(X)_c is row row_perm[r] in C₂(X_c).
    pub row_perm: Vec<usize>,
    /// max entrywise gap between permuted basis realizations.
    pub basis_deviation: f64,
    /// max |norm difference| over the seeded samples.
    pub norm_deviation: f64,
    pub samples: usize,
    pub involution: bool,
}

fn shuffle_perm(d: usize) -> Vec<usize> {
    // [x, y, x', y'] -> [x, x', y, y']
    (0..4 * d)
        .map(|k| {
            let (blk, off) = (k / d, k % d);
            let to = [0, 2, 1, 3][blk];
            to * d + off
        })
        .collect()
}

fn permute_elem(x: &MatElem, perm: &[usize]) -> MatElem {
    let n = x.level();
    let mut out = MatElem::zeros(n, x.dim());
    for i in 0..n {
        for j in 0..n {
            let src = x.entry(i, j);
            let dst = out.entry_mut(i, j);
            for (k, &pk) in perm.iter().enumerate() {
                dst[pk] = src[k];
            }
        }
    }
    out
}

/// Builds and checks the shuffle isomorphism at levels 1..=3.
pub fn shuffle_iso(space: &OpSpace, samples: usize, seed: u64) -> Result<ShuffleCertificate> {
    if space.is_complexified() {
        return Err(Error::AlreadyComplexified);
    }
    let d = space.dim();
    let p = space.ambient().0;
    let c2c = complexify_space(&column_space(space))?;
    let c2xc = column_space(&complexify_space(space)?);
    let coeff_perm = shuffle_perm(d);
    let row_perm: Vec<usize> = (0..4 * p)
        .map(|r| {
            let (blk, off) = (r / p, r % p);
            [0, 2, 1, 3][blk] * p + off
        })
        .collect();
    let mut inv_rows = vec![0; 4 * p];
    for (r, &pr) in row_perm.iter().enumerate() {
        inv_rows[pr] = r;
    }
    let mut basis_dev: f64 = 0.0;
    for (k, b) in c2c.basis().iter().enumerate() {
        let moved = b.permute_rows(&inv_rows);
        basis_dev = basis_dev.max(moved.max_abs_diff(&c2xc.basis()[coeff_perm[k]]));
    }
    let mut norm_dev: f64 = 0.0;
    for s in 0..samples {
        let mut r = rng::stream(seed, &[s as u64]);
        let n = 1 + s % 3;
        let z = c2c.random_elem(n, &mut r);
        let a = level_norm(&c2c, &z)?;
        let b = level_norm(&c2xc, &permute_elem(&z, &coeff_perm))?;
        norm_dev = norm_dev.max((a - b).abs());
    }
    let involution = coeff_perm
        .iter()
        .enumerate()
        .all(|(k, &pk)| coeff_perm[pk] == k);
    Ok(ShuffleCertificate {
        coeff_perm,
        row_perm,
        basis_deviation: basis_dev,
        norm_deviation: norm_dev,
        samples,
        involution,
    })
}

/// max over seeded z of ‖σ (τ_P)_c σ⁻¹ z - τ_{P_c} z‖ in C₂(X_c). Holds with
/// deviation 0 for every linear endomap P.
pub fn projection_complexification_consistency(
    p: &CBMap,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let tau_c = complexify_map(&tau_map(p)?)?;
    let p_c = complexify_map(p)?;
    let tau_pc = tau_map(&p_c)?;
    let target = tau_pc.domain().clone();
    let perm = shuffle_perm(p.domain().dim());
    let mut inv = vec![0; perm.len()];
    for (k, &pk) in perm.iter().enumerate() {
        inv[pk] = k;
    }
    let mut worst: f64 = 0.0;
    for s in 0..samples {
        let mut r = rng::stream(seed, &[s as u64]);
        let n = 1 + s % 3;
        let z = target.random_elem(n, &mut r);
        let lhs = permute_elem(&tau_c.apply(&permute_elem(&z, &inv))?, &perm);
        let rhs = tau_pc.apply(&z)?;
        worst = worst.max(level_norm(&target, &lhs.sub(&rhs))?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplierCheck {
    pub holds: bool,
    /// max_k max-entry |u(B_k) - a B_k|
    pub residual: f64,
    pub tol: f64,
}

fn check_multiplier_shapes(space: &OpSpace, u: &CBMap) -> Result<()> {
    if u.domain() != space || !u.is_endomap() {
        return Err(Error::Precondition(
            "the map must be an endomap of the given space".into(),
        ));
    }
    Ok(())
}

/// Is u(x) = a x on the basis (hence everywhere)?
pub fn verify_multiplier_witness(space: &OpSpace, u: &CBMap, a: &Mat) -> Result<MultiplierCheck> {
    check_multiplier_shapes(space, u)?;
    let p = space.ambient().0;
    if a.shape() != (p, p) {
        return Err(shape_err(
            format!("{p}x{p} multiplier"),
            format!("{}x{}", a.rows(), a.cols()),
        ));
    }
    a.check_finite()?;
    let mut residual: f64 = 0.0;
    for (k, b) in space.basis().iter().enumerate() {
        let image = space.combine(&u.matrix().col(k));
        residual = residual.max(image.max_abs_diff(&a.matmul(b)));
    }
    Ok(MultiplierCheck {
        holds: residual <= MULTIPLIER_TOL,
        residual,
        tol: MULTIPLIER_TOL,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplierSolution {
    /// Least-squares a; a genuine witness only when `accepted`.
    pub a: Mat,
    /// Frobenius residual of a [B_1 ... B_d] = [u(B_1) ... u(B_d)].
    pub residual: f64,
    pub threshold: f64,
    pub accepted: bool,
}

/// Solves a B_k = u(B_k) for all k by least squares.
pub fn solve_multiplier(space: &OpSpace, u: &CBMap) -> Result<MultiplierSolution> {
    check_multiplier_shapes(space, u)?;
    let bs: Vec<&Mat> = space.basis().iter().collect();
    let images: Vec<Mat> = (0..space.dim())
        .map(|k| space.combine(&u.matrix().col(k)))
        .collect();
    let h = Mat::from_blocks(&[bs]);
    let v = Mat::from_blocks(&[images.iter().collect()]);
    let (at, residual) = linalg::lstsq(&h.transpose(), &v.transpose(), 1e-12);
    let scale = 1.0 + images.iter().map(linalg::spectral_norm).fold(0.0, f64::max);
    let threshold = MULTIPLIER_TOL * scale;
    Ok(MultiplierSolution {
        a: at.transpose(),
        residual,
        threshold,
        accepted: residual <= threshold,
    })
}

/// Lower bound for ‖(τ_u)_n‖; a value above 1 shows u is not a left
/// multiplier of norm at most 1.
pub fn tau_u_level_cb(u: &CBMap, level: usize, opts: &CbOptions) -> Result<CbEstimate> {
    level_cb_norm_lower(&tau_map(u)?, level, opts)
}

#[derive(Debug, Clone, Serialize)]
pub struct RightIdealReport {
    pub is_right_ideal: bool,
    /// Largest residual of J_j B_k against span(J).
    pub max_residual: f64,
    /// (j, k) attaining it.
    pub worst_pair: Option<(usize, usize)>,
}

/// Is span(J) closed under right multiplication by the algebra? J is given
/// by coefficient vectors over the algebra's basis.
pub fn is_right_ideal(algebra: &OpAlgebra, subspace: &[Vec<f64>]) -> Result<RightIdealReport> {
    let d = algebra.dim();
    if subspace.is_empty() {
        return Ok(RightIdealReport {
            is_right_ideal: true,
            max_residual: 0.0,
            worst_pair: None,
        });
    }
    for (j, v) in subspace.iter().enumerate() {
        if v.len() != d {
            return Err(shape_err(
                format!("{d} coefficients"),
                format!("{} in vector {j}", v.len()),
            ));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: j, col: 0 });
        }
    }
    let span = Mat::from_rows(subspace)?.transpose();
    let mut worst = (0.0, None);
    for (j, v) in subspace.iter().enumerate() {
        for k in 0..d {
            let prod = algebra.product_coeffs(v, &unit(d, k));
            let rhs = Mat::from_vec(d, 1, prod.clone())?;
            let (_, res) = linalg::lstsq(&span, &rhs, 1e-12);
            let norm = prod.iter().map(|x| x * x).sum::<f64>().sqrt();
            let rel = res / (1.0 + norm);
            if rel > worst.0 {
                worst = (rel, Some((j, k)));
            }
        }
    }
    Ok(RightIdealReport {
        is_right_ideal: worst.0 <= MULTIPLIER_TOL,
        max_residual: worst.0,
        worst_pair: worst.1,
    })
}

fn unit(d: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[k] = 1.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m2() -> OpSpace {
        OpSpace::full(2, 2)
    }

    fn left_mult(e: &Mat) -> CBMap {
        let e = e.clone();
        CBMap::from_ambient_fn(&m2(), move |x| e.matmul(x)).unwrap()
    }

    fn symmetrization() -> Projection {
        Projection::new(
            CBMap::from_ambient_fn(&m2(), |x| x.add(&x.transpose()).scale(0.5)).unwrap(),
        )
        .unwrap()
    }

    fn quick() -> CertifyOptions {
        CertifyOptions {
            max_level: 3,
            samples: 60,
            restarts: 4,
            seed: 3,
            tol: 1e-9,
        }
    }

    #[test]
    fn rejects_non_idempotent() {
        let r = Projection::new(CBMap::scaling(&m2(), 2.0));
        assert!(matches!(r, Err(Error::NotIdempotent { .. })));
    }

    #[test]
    fn nu_mu_tau_basics() {
        let id = Projection::new(CBMap::identity(&m2())).unwrap();
        let maps = build_nu_mu_tau(&id);
        let x = MatElem::scalar(vec![1.0, 2.0, 3.0, 4.0]);
        let nx = maps.nu.apply(&x).unwrap();
        assert_eq!(nx.coeffs(), &[1.0, 2.0, 3.0, 4.0, 0.0, 0.0, 0.0, 0.0]);
        let zero = Projection::new(CBMap::scaling(&m2(), 0.0)).unwrap();
        let nz = build_nu_mu_tau(&zero).nu.apply(&x).unwrap();
        assert_eq!(nz.coeffs(), &[0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0]);
        for p in [id, zero, symmetrization()] {
            let m = build_nu_mu_tau(&p);
            let comp = m.mu.compose(&m.nu).unwrap();
            assert!(comp.matrix().max_abs_diff(&Mat::identity(4)) <= 1e-12);
        }
    }

    #[test]
    fn left_corner_projection_is_certified() {
        let p = Projection::new(left_mult(&Mat::diag(&[1.0, 0.0]))).unwrap();
        let c = certify_left_m_projection(&p, &quick()).unwrap();
        assert!(c.is_certified(), "{c:?}");
        assert_eq!(c.levels_checked, 3);
        let id = Projection::new(CBMap::identity(&m2())).unwrap();
        assert!(certify_left_m_projection(&id, &quick())
            .unwrap()
            .is_certified());
    }

    #[test]
    fn symmetrization_is_refuted_at_e12() {
        let p = symmetrization();
        let c = certify_left_m_projection(&p, &quick()).unwrap();
        let Verdict::Refuted {
            check,
            level,
            witness,
            observed,
            expected,
        } = &c.verdict
        else {
            panic!("{c:?}")
        };
        assert_eq!(*check, Check::NuIsometry);
        assert_eq!(*level, 1);
        assert_eq!(witness.coeffs(), &[0.0, 1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(*observed, 0.5f64.sqrt(), epsilon = 1e-9);
        assert_eq!(*expected, 1.0);
        let again = c.reverify(&p).unwrap().unwrap();
        assert!((again - observed).abs() <= 1e-12);
    }

    #[test]
    fn shuffle_examples() {
        let c = shuffle_iso(&OpSpace::scalars(), 20, 1).unwrap();
        assert_eq!(c.coeff_perm, vec![0, 2, 1, 3]);
        assert_eq!(c.basis_deviation, 0.0);
        assert!(c.norm_deviation <= 1e-12);
        let c = shuffle_iso(&m2(), 50, 2).unwrap();
        assert_eq!(c.coeff_perm.len(), 16);
        assert_eq!(c.basis_deviation, 0.0);
        assert!(c.norm_deviation <= 1e-12);
        assert!(c.involution);
        let xc = complexify_space(&m2()).unwrap();
        assert!(matches!(
            shuffle_iso(&xc, 1, 0),
            Err(Error::AlreadyComplexified)
        ));
    }

    #[test]
    fn complexification_consistency_examples() {
        assert_eq!(
            projection_complexification_consistency(&CBMap::identity(&m2()), 20, 1).unwrap(),
            0.0
        );
        let e = left_mult(&Mat::diag(&[1.0, 0.0]));
        assert!(projection_complexification_consistency(&e, 20, 2).unwrap() <= 1e-12);
        assert!(
            projection_complexification_consistency(symmetrization().map(), 20, 3).unwrap()
                <= 1e-12
        );
    }

    #[test]
    fn multiplier_witness_examples() {
        let a = Mat::diag(&[2.0, 1.0]);
        let u = left_mult(&a);
        assert!(verify_multiplier_witness(&m2(), &u, &a).unwrap().holds);
        let sol = solve_multiplier(&m2(), &u).unwrap();
        assert!(sol.accepted);
        assert!(sol.a.max_abs_diff(&a) <= 1e-12);

        let zero = CBMap::scaling(&m2(), 0.0);
        assert!(
            verify_multiplier_witness(&m2(), &zero, &Mat::zeros(2, 2))
                .unwrap()
                .holds
        );

        let t = CBMap::from_ambient_fn(&m2(), Mat::transpose).unwrap();
        let sol = solve_multiplier(&m2(), &t).unwrap();
        assert!(!sol.accepted);
        assert!(!verify_multiplier_witness(&m2(), &t, &sol.a).unwrap().holds);
        assert!(verify_multiplier_witness(&m2(), &t, &Mat::zeros(3, 3)).is_err());
    }

    #[test]
    fn tau_u_examples() {
        let opts = CbOptions {
            restarts: 6,
            iters: 300,
            seed: 5,
        };
        let e = left_mult(&Mat::diag(&[1.0, 0.0]));
        for n in 1..=3 {
            assert!(tau_u_level_cb(&e, n, &opts).unwrap().value <= 1.0 + 1e-9);
        }
        assert!(
            tau_u_level_cb(&CBMap::scaling(&m2(), 2.0), 2, &opts)
                .unwrap()
                .value
                >= 2.0 - 1e-6
        );
        assert_abs_diff_eq!(
            tau_u_level_cb(&CBMap::identity(&m2()), 2, &opts)
                .unwrap()
                .value,
            1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn right_ideal_examples() {
        let upper = OpSpace::new(
            2,
            2,
            vec![
                Mat::unit(2, 2, 0, 0),
                Mat::unit(2, 2, 0, 1),
                Mat::unit(2, 2, 1, 1),
            ],
        )
        .unwrap();
        let a = OpAlgebra::from_space(upper).unwrap();
        assert!(
            is_right_ideal(&a, &[vec![0.0, 1.0, 0.0]])
                .unwrap()
                .is_right_ideal
        );
        let r = is_right_ideal(&a, &[vec![1.0, 0.0, 0.0]]).unwrap();
        assert!(!r.is_right_ideal);
        assert_eq!(r.worst_pair, Some((0, 1)));
        let all = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert!(is_right_ideal(&a, &all).unwrap().is_right_ideal);
    }
}
