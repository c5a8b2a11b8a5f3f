//! Real operator algebras, operator systems and ternary rings of operators.

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::linalg::{self, Mat};
use crate::opspace::{
    cb_profile, complexify_space, level_norm, CBMap, CbOptions, MatElem, OpSpace, OpSpaceJson,
};
use crate::rng;

pub const CLOSURE_TOL: f64 = 1e-10;

/// Frobenius residual of `m` against span(set), which may be dependent.
fn residual_against(set: &[Mat], m: &Mat) -> f64 {
    if set.is_empty() {
        return m.frobenius();
    }
    let rows = m.rows() * m.cols();
    let mut a = Mat::zeros(rows, set.len());
    for (k, b) in set.iter().enumerate() {
        for (idx, v) in b.as_slice().iter().enumerate() {
            a[(idx, k)] = *v;
        }
    }
    let b = Mat::from_vec(rows, 1, m.as_slice().to_vec()).expect("finite product");
    linalg::lstsq(&a, &b, 1e-13).1
}

/// A space closed under a bilinear product, recorded by its structure tensor
/// B_j B_k = Σ_m c[j][k][m] B_m.
#[derive(Debug, Clone, PartialEq)]
pub struct OpAlgebra {
    space: OpSpace,
    structure: Vec<Vec<Vec<f64>>>,
    /// Largest |B_j B_k - Σ c B_m| in the ambient; None for an abstract product.
    closure_residual: Option<f64>,
}

impl OpAlgebra {
    /// Derives the product from ambient matrix multiplication.
    pub fn from_space(space: OpSpace) -> Result<Self> {
        let (p, q) = space.ambient();
        if p != q {
            return Err(Error::NotSquare { rows: p, cols: q });
        }
        let d = space.dim();
        let mut structure = vec![vec![vec![0.0; d]; d]; d];
        let mut worst: f64 = 0.0;
        for j in 0..d {
            for k in 0..d {
                let prod = space.basis()[j].matmul(&space.basis()[k]);
                let (res, coords) = space.span_residual(&prod);
                if res > CLOSURE_TOL * (1.0 + prod.frobenius()) {
                    return Err(Error::NotClosed {
                        what: format!("B_{j} B_{k} is not in the span"),
                        residual: res,
                        tol: CLOSURE_TOL,
                    });
                }
                let back = space.combine(&coords);
                worst = worst.max(back.max_abs_diff(&prod));
                structure[j][k] = coords;
            }
        }
        Ok(OpAlgebra {
            space,
            structure,
            closure_residual: Some(worst),
        })
    }

    /// A product given abstractly, unrelated to ambient multiplication.
    pub fn with_structure(space: OpSpace, structure: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let (p, q) = space.ambient();
        if p != q {
            return Err(Error::NotSquare { rows: p, cols: q });
        }
        let d = space.dim();
        let ok = structure.len() == d
            && structure
                .iter()
                .all(|r| r.len() == d && r.iter().all(|v| v.len() == d));
        if !ok {
            return Err(shape_err(
                format!("{d}x{d}x{d} structure tensor"),
                "other shape",
            ));
        }
        if structure.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        Ok(OpAlgebra {
            space,
            structure,
            closure_residual: None,
        })
    }

    pub fn space(&self) -> &OpSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn structure(&self) -> &[Vec<Vec<f64>>] {
        &self.structure
    }

    pub fn closure_residual(&self) -> Option<f64> {
        self.closure_residual
    }

    /// Is the product the ambient one?
    pub fn is_concrete(&self) -> bool {
        self.closure_residual.is_some()
    }

    /// Coefficients of ab for a, b in A.
    pub fn product_coeffs(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for (j, &aj) in a.iter().enumerate() {
            if aj == 0.0 {
                continue;
            }
            for (k, &bk) in b.iter().enumerate() {
                if bk == 0.0 {
                    continue;
                }
                for (o, c) in out.iter_mut().zip(&self.structure[j][k]) {
                    *o += aj * bk * c;
                }
            }
        }
        out
    }

    /// The product in M_n(A): (xy)_ik = Σ_j x_ij y_jk.
    pub fn product(&self, x: &MatElem, y: &MatElem) -> Result<MatElem> {
        self.space.check_elem(x)?;
        self.space.check_elem(y)?;
        if x.level() != y.level() {
            return Err(Error::LevelMismatch(x.level(), y.level()));
        }
        let n = x.level();
        let d = self.dim();
        let mut out = MatElem::zeros(n, d);
        for i in 0..n {
            for k in 0..n {
                let mut acc = vec![0.0; d];
                for j in 0..n {
                    for (a, v) in acc
                        .iter_mut()
                        .zip(self.product_coeffs(x.entry(i, j), y.entry(j, k)))
                    {
                        *a += v;
                    }
                }
                out.entry_mut(i, k).copy_from_slice(&acc);
            }
        }
        Ok(out)
    }

    /// Coordinates of the ambient identity, if it lies in A.
    pub fn unit_coeffs(&self) -> Option<Vec<f64>> {
        let p = self.space.ambient().0;
        self.space.coordinates(&Mat::identity(p), CLOSURE_TOL).ok()
    }
}

#[derive(Serialize, Deserialize)]
struct OpAlgebraJson {
    #[serde(flatten)]
    space: OpSpaceJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    structure: Option<Vec<Vec<Vec<f64>>>>,
}

impl Serialize for OpAlgebra {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OpAlgebraJson {
            space: OpSpaceJson::from(&self.space),
            structure: if self.is_concrete() {
                None
            } else {
                Some(self.structure.clone())
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OpAlgebra {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = OpAlgebraJson::deserialize(d)?;
        let space = OpSpace::try_from(j.space).map_err(serde::de::Error::custom)?;
        match j.structure {
            Some(c) => OpAlgebra::with_structure(space, c),
            None => OpAlgebra::from_space(space),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BrsReport {
    pub level: usize,
    pub samples: usize,
    /// max(0, ‖ab‖ - ‖a‖‖b‖) over all probes.
    pub violation: f64,
    pub witness: Option<(MatElem, MatElem)>,
    pub tol: f64,
    pub pass: bool,
}

/// Submultiplicativity of the norm on M_n(A) under the structure-tensor
/// product, probed on pairs of basis units and on seeded Gaussian pairs.
pub fn check_brs_level(
    alg: &OpAlgebra,
    level: usize,
    samples: usize,
    seed: u64,
) -> Result<BrsReport> {
    if level == 0 {
        return Err(Error::Invalid("level must be at least 1".into()));
    }
    let d = alg.dim();
    let space = alg.space();
    let mut pairs = Vec::new();
    for j in 0..d {
        for k in 0..d {
            pairs.push((
                MatElem::basis_unit(level, d, 0, 0, j),
                MatElem::basis_unit(level, d, 0, 0, k),
            ));
        }
    }
    let unit = |v: Vec<f64>| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        MatElem::from_flat(level, d, v.iter().map(|x| x / n).collect())
    };
    for s in 0..samples {
        let mut r = rng::stream(seed, &[level as u64, s as u64]);
        let a = unit(rng::gaussian_vec(&mut r, level * level * d));
        let b = unit(rng::gaussian_vec(&mut r, level * level * d));
        pairs.push((a, b));
    }
    let mut worst = (0.0, None);
    for (a, b) in pairs {
        let ab = alg.product(&a, &b)?;
        let v = level_norm(space, &ab)? - level_norm(space, &a)? * level_norm(space, &b)?;
        if v > worst.0 {
            worst = (v, Some((a, b)));
        }
    }
    Ok(BrsReport {
        level,
        samples,
        violation: worst.0,
        witness: worst.1,
        tol: CLOSURE_TOL,
        pass: worst.0 <= CLOSURE_TOL,
    })
}

/// A¹ = span(A, I). For a complexified algebra the complex unit is adjoined,
/// that is I and J, keeping real parts before imaginary parts.
pub fn unitize(alg: &OpAlgebra) -> Result<OpAlgebra> {
    if !alg.is_concrete() {
        return Err(Error::Precondition(
            "unitization needs the ambient product".into(),
        ));
    }
    if alg.unit_coeffs().is_some() {
        return Ok(alg.clone());
    }
    let space = alg.space();
    let p = space.ambient().0;
    let basis = space.basis();
    let new_space = if space.is_complexified() {
        let h = basis.len() / 2;
        let mut b: Vec<Mat> = basis[..h].to_vec();
        b.push(Mat::identity(p));
        b.extend_from_slice(&basis[h..]);
        b.push(linalg::complex_structure(p / 2));
        OpSpace::new_complexified(p, p, b)?
    } else {
        let mut b = basis.to_vec();
        b.push(Mat::identity(p));
        OpSpace::new(p, p, b)?
    };
    OpAlgebra::from_space(new_space)
}

pub fn complexify_algebra(alg: &OpAlgebra) -> Result<OpAlgebra> {
    if !alg.is_concrete() {
        return Err(Error::Precondition(
            "complexification needs the ambient product".into(),
        ));
    }
    OpAlgebra::from_space(complexify_space(alg.space())?)
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitizationReport {
    pub dim_unitized_then_complexified: usize,
    pub dim_complexified_then_unitized: usize,
    /// Largest gap between corresponding basis matrices.
    pub basis_deviation: f64,
    pub norm_deviation: f64,
    pub samples: usize,
}

/// Compares (A¹)_c with (A_c)¹ under the identity on coefficients.
pub fn unitization_complexification_check(
    alg: &OpAlgebra,
    samples: usize,
    seed: u64,
) -> Result<UnitizationReport> {
    let a = complexify_space(unitize(alg)?.space())?;
    let b = unitize(&complexify_algebra(alg)?)?.space().clone();
    let basis_deviation = if a.dim() == b.dim() {
        a.basis()
            .iter()
            .zip(b.basis())
            .map(|(x, y)| x.max_abs_diff(y))
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let mut norm_deviation: f64 = 0.0;
    if a.dim() == b.dim() {
        for s in 0..samples {
            let mut r = rng::stream(seed, &[s as u64]);
            let x = a.random_elem(1 + s % 3, &mut r);
            norm_deviation = norm_deviation.max((level_norm(&a, &x)? - level_norm(&b, &x)?).abs());
        }
    }
    Ok(UnitizationReport {
        dim_unitized_then_complexified: a.dim(),
        dim_complexified_then_unitized: b.dim(),
        basis_deviation,
        norm_deviation,
        samples,
    })
}

/// Positions of the generators inside the Paulsen system's basis.
#[derive(Debug, Clone, Serialize)]
pub struct PaulsenMarkers {
    /// diag(I_p, 0)
    pub lambda: usize,
    /// diag(0, I_q)
    pub mu: usize,
    /// [[0, B_k], [0, 0]]
    pub upper: std::ops::Range<usize>,
    /// [[0, 0], [B_k^T, 0]]
    pub lower: std::ops::Range<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PaulsenSystem {
    pub space: OpSpace,
    pub p: usize,
    pub q: usize,
    pub markers: PaulsenMarkers,
    pub transpose_residual: f64,
}

/// 𝒮(X) = {[[λ I, x], [y^T, μ I]]} inside M_{p+q}.
pub fn build_paulsen_system(x: &OpSpace) -> Result<PaulsenSystem> {
    let (p, q) = x.ambient();
    let n = p + q;
    let d = x.dim();
    let mut basis = Vec::with_capacity(2 * d + 2);
    let mut lam = Mat::zeros(n, n);
    lam.set_block(0, 0, &Mat::identity(p));
    let mut mu = Mat::zeros(n, n);
    mu.set_block(p, p, &Mat::identity(q));
    basis.push(lam);
    basis.push(mu);
    for b in x.basis() {
        let mut m = Mat::zeros(n, n);
        m.set_block(0, p, b);
        basis.push(m);
    }
    for b in x.basis() {
        let mut m = Mat::zeros(n, n);
        m.set_block(p, 0, &b.transpose());
        basis.push(m);
    }
    let space = OpSpace::new(n, n, basis)?;
    // the transpose swaps each upper generator with its lower partner
    let partner = |i: usize| match i {
        0 | 1 => i,
        i if i < 2 + d => i + d,
        i => i - d,
    };
    let transpose_residual = (0..space.dim())
        .map(|i| {
            space.basis()[i]
                .transpose()
                .max_abs_diff(&space.basis()[partner(i)])
        })
        .fold(0.0, f64::max);
    let id_residual = space.span_residual(&Mat::identity(n)).0;
    if transpose_residual > CLOSURE_TOL || id_residual > CLOSURE_TOL {
        return Err(Error::NotClosed {
            what: "Paulsen system lost the unit or transpose closure".into(),
            residual: transpose_residual.max(id_residual),
            tol: CLOSURE_TOL,
        });
    }
    Ok(PaulsenSystem {
        space,
        p,
        q,
        markers: PaulsenMarkers {
            lambda: 0,
            mu: 1,
            upper: 2..2 + d,
            lower: 2 + d..2 + 2 * d,
        },
        transpose_residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityWitness {
    pub level: usize,
    /// Realization of a real-positive element of M_n(𝒮(X)).
    pub element: Mat,
    /// Its image under φ_n, which is not real-positive.
    pub image: Mat,
    pub image_min_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PaulsenReport {
    pub levels: usize,
    pub samples: usize,
    pub checked: usize,
    pub tol: f64,
    pub pass: bool,
    pub witness: Option<PositivityWitness>,
}

pub const POSITIVITY_TOL: f64 = 1e-9;

/// Coefficients over 𝒮(X) of the level-n element with scalar corners λ, μ,
/// upper corner x and lower corner x^T.
fn paulsen_elem(d: usize, lam: &Mat, mu: &Mat, x: &MatElem) -> MatElem {
    let n = x.level();
    let mut out = MatElem::zeros(n, 2 * d + 2);
    for i in 0..n {
        for j in 0..n {
            let e = out.entry_mut(i, j);
            e[0] = lam[(i, j)];
            e[1] = mu[(i, j)];
            e[2..2 + d].copy_from_slice(x.entry(i, j));
            e[2 + d..].copy_from_slice(x.entry(j, i));
        }
    }
    out
}

/// Checks that φ = id ⊕ id ⊕ u ⊕ u on Paulsen systems keeps real-positive
/// elements real-positive at levels 1..=levels. Half of the samples are
/// boundary blocks [[I, x], [x^T, I]] with ‖x‖ = r (r = 1 for half of
/// those), the rest are congruences of such blocks by diag(L ⊗ I, R ⊗ I).
pub fn paulsen_positivity_transfer(
    u: &CBMap,
    levels: usize,
    samples: usize,
    seed: u64,
) -> Result<PaulsenReport> {
    let src = build_paulsen_system(u.domain())?;
    let dst = build_paulsen_system(u.codomain())?;
    let dx = u.domain().dim();
    let dy = u.codomain().dim();
    let mut phi = Mat::zeros(2 * dy + 2, 2 * dx + 2);
    phi[(0, 0)] = 1.0;
    phi[(1, 1)] = 1.0;
    phi.set_block(2, 2, u.matrix());
    phi.set_block(2 + dy, 2 + dx, u.matrix());
    let phi = CBMap::new(src.space.clone(), dst.space.clone(), phi)?;
    let mut checked = 0;
    for n in 1..=levels {
        for s in 0..samples {
            let mut r = rng::stream(seed, &[n as u64, s as u64]);
            let x = u.domain().random_elem(n, &mut r);
            let nx = level_norm(u.domain(), &x)?;
            if nx == 0.0 {
                continue;
            }
            let elem = if s % 2 == 0 {
                let radius = if s % 4 == 0 {
                    1.0
                } else {
                    rng::uniform(&mut r, 0.0, 1.0)
                };
                let x = x.scale(radius / nx);
                paulsen_elem(dx, &Mat::identity(n), &Mat::identity(n), &x)
            } else {
                let x = x.scale(rng::uniform(&mut r, 0.0, 1.0) / nx);
                let l = rng::gaussian_mat(&mut r, n, n);
                let rr = rng::gaussian_mat(&mut r, n, n);
                let core = x.sandwich(&l, &rr.transpose());
                paulsen_elem(
                    dx,
                    &l.matmul(&l.transpose()),
                    &rr.matmul(&rr.transpose()),
                    &core,
                )
            };
            let element = src.space.realize(&elem)?;
            if !linalg::is_real_positive(&element, POSITIVITY_TOL)? {
                continue;
            }
            checked += 1;
            let image = dst.space.realize(&phi.apply(&elem)?)?;
            if !linalg::is_real_positive(&image, POSITIVITY_TOL)? {
                let image_min_eigenvalue = linalg::min_eigenvalue(&image)?;
                return Ok(PaulsenReport {
                    levels,
                    samples,
                    checked,
                    tol: POSITIVITY_TOL,
                    pass: false,
                    witness: Some(PositivityWitness {
                        level: n,
                        element,
                        image,
                        image_min_eigenvalue,
                    }),
                });
            }
        }
    }
    Ok(PaulsenReport {
        levels,
        samples,
        checked,
        tol: POSITIVITY_TOL,
        pass: true,
        witness: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Condition {
    pub holds: bool,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChoiEffrosPreconditions {
    pub unital_algebra: bool,
    pub unital_map: Condition,
    pub idempotent: Condition,
    pub selfadjoint: Condition,
    /// Largest cb lower bound found at levels 1 and 2.
    pub completely_contractive: Condition,
    /// "selfadjoint" when φ commutes with the transpose, otherwise
    /// "unital-contractive" when unitality and complete contractivity suffice.
    pub mode: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChoiEffrosReport {
    pub preconditions: ChoiEffrosPreconditions,
    /// Coefficient vectors (over A) of a basis of the range R.
    pub range_basis: Vec<Vec<f64>>,
    /// table[j][k]: coordinates of r_j ∘ r_k over the range basis.
    pub table: Vec<Vec<Vec<f64>>>,
    pub samples: usize,
    pub bilinearity: f64,
    pub associativity: f64,
    pub unit: f64,
    pub involution: f64,
    pub c_star_identity: f64,
    pub left_bimodule: f64,
    pub right_bimodule: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Independent columns of m, chosen greedily left to right.
fn column_basis(m: &Mat) -> Vec<Vec<f64>> {
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for c in 0..m.cols() {
        let col = m.col(c);
        let mut v = col.clone();
        for o in &ortho {
            let t: f64 = o.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (vi, oi) in v.iter_mut().zip(o) {
                *vi -= t * oi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = 1.0 + col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 * scale {
            ortho.push(v.iter().map(|x| x / norm).collect());
            chosen.push(col);
        }
    }
    chosen
}

/// The Choi–Effros product r ∘ s = φ(rs) on the range of a unital
/// idempotent φ, with its algebraic and metric identities checked on seeded
/// samples. The norm is always the original one of A.
pub fn choi_effros_product(
    alg: &OpAlgebra,
    phi: &CBMap,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<ChoiEffrosReport> {
    if phi.domain() != alg.space() || !phi.is_endomap() {
        return Err(Error::Precondition(
            "φ must be an endomap of the algebra".into(),
        ));
    }
    let space = alg.space();
    let d = alg.dim();
    let pm = phi.matrix();
    let apply = |v: &[f64]| pm.matvec(v);
    let mat = |v: &[f64]| space.combine(v);
    let dist = |a: &[f64], b: &[f64]| {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        linalg::spectral_norm(&space.combine(&diff))
    };
    let transpose = |v: &[f64]| -> Option<Vec<f64>> {
        space.coordinates(&mat(v).transpose(), CLOSURE_TOL).ok()
    };

    let unit = alg.unit_coeffs();
    let unital_map = match &unit {
        Some(e) => {
            let dev = dist(&apply(e), e);
            Condition {
                holds: dev <= tol,
                deviation: dev,
            }
        }
        None => Condition {
            holds: false,
            deviation: f64::INFINITY,
        },
    };
    let idem = pm.matmul(pm).max_abs_diff(pm);
    let idempotent = Condition {
        holds: idem <= tol,
        deviation: idem,
    };
    let mut sa: f64 = 0.0;
    for s in 0..samples.min(100) {
        let mut r = rng::stream(seed, &[1, s as u64]);
        let x = rng::gaussian_vec(&mut r, d);
        match transpose(&x) {
            Some(xt) => {
                let lhs = apply(&xt);
                let rhs = mat(&apply(&x)).transpose();
                sa = sa.max(linalg::spectral_norm(&mat(&lhs).sub(&rhs)));
            }
            None => {
                sa = f64::INFINITY;
                break;
            }
        }
    }
    let selfadjoint = Condition {
        holds: sa <= tol,
        deviation: sa,
    };
    let prof = cb_profile(
        phi,
        2,
        &CbOptions {
            restarts: 8,
            iters: 300,
            seed,
        },
    )?;
    let cbv = prof.last().map(|e| e.value).unwrap_or(0.0);
    let completely_contractive = Condition {
        holds: cbv <= 1.0 + tol,
        deviation: (cbv - 1.0).max(0.0),
    };
    let base =
        unit.is_some() && unital_map.holds && idempotent.holds && completely_contractive.holds;
    let mode = match (base, selfadjoint.holds) {
        (false, _) => None,
        (true, true) => Some("selfadjoint".to_string()),
        (true, false) => Some("unital-contractive".to_string()),
    };
    let pre = ChoiEffrosPreconditions {
        unital_algebra: unit.is_some(),
        unital_map,
        idempotent,
        selfadjoint,
        completely_contractive,
        mode,
    };

    let range_basis = column_basis(pm);
    let k = range_basis.len();
    let circ = |a: &[f64], b: &[f64]| apply(&alg.product_coeffs(a, b));
    let rb_mat = Mat::from_rows(&range_basis)
        .unwrap_or_else(|_| Mat::zeros(0, d))
        .transpose();
    let mut table = vec![vec![vec![0.0; k]; k]; k];
    for j in 0..k {
        for l in 0..k {
            let v = circ(&range_basis[j], &range_basis[l]);
            let (coords, _) = linalg::lstsq(&rb_mat, &Mat::from_vec(d, 1, v)?, 1e-12);
            table[j][l] = coords.into_vec();
        }
    }
    let mut report = ChoiEffrosReport {
        preconditions: pre,
        range_basis: range_basis.clone(),
        table,
        samples,
        bilinearity: 0.0,
        associativity: 0.0,
        unit: 0.0,
        involution: 0.0,
        c_star_identity: 0.0,
        left_bimodule: 0.0,
        right_bimodule: 0.0,
        tol,
        pass: false,
    };
    if report.preconditions.mode.is_none() || k == 0 {
        return Ok(report);
    }
    let unit = unit.expect("unital");
    let in_range = |r: &mut rng::Stream| -> Vec<f64> {
        let w = rng::gaussian_vec(r, k);
        let mut v = vec![0.0; d];
        for (wi, b) in w.iter().zip(&range_basis) {
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi += wi * bi;
            }
        }
        v
    };
    for s in 0..samples {
        let mut r = rng::stream(seed, &[2, s as u64]);
        let a = in_range(&mut r);
        let b = in_range(&mut r);
        let c = in_range(&mut r);
        let x = rng::gaussian_vec(&mut r, d);
        let alpha = rng::gaussian(&mut r);

        let lin: Vec<f64> = a.iter().zip(&b).map(|(p, q)| alpha * p + q).collect();
        let lhs = circ(&lin, &c);
        let rhs: Vec<f64> = circ(&a, &c)
            .iter()
            .zip(circ(&b, &c))
            .map(|(p, q)| alpha * p + q)
            .collect();
        report.bilinearity = report.bilinearity.max(dist(&lhs, &rhs));

        let ab_c = circ(&circ(&a, &b), &c);
        let a_bc = circ(&a, &circ(&b, &c));
        report.associativity = report.associativity.max(dist(&ab_c, &a_bc));

        report.unit = report
            .unit
            .max(dist(&circ(&unit, &a), &a))
            .max(dist(&circ(&a, &unit), &a));

        match (transpose(&a), transpose(&b)) {
            (Some(at), Some(bt)) => {
                let lhs = mat(&circ(&a, &b)).transpose();
                let rhs = mat(&circ(&bt, &at));
                report.involution = report.involution.max(linalg::spectral_norm(&lhs.sub(&rhs)));
                let na = linalg::spectral_norm(&mat(&a));
                let nta = linalg::spectral_norm(&mat(&circ(&at, &a)));
                report.c_star_identity = report
                    .c_star_identity
                    .max((nta - na * na).abs() / (1.0 + na * na));
            }
            _ => {
                report.involution = f64::INFINITY;
                report.c_star_identity = f64::INFINITY;
            }
        }

        let left = dist(
            &apply(&alg.product_coeffs(&x, &a)),
            &apply(&alg.product_coeffs(&apply(&x), &a)),
        );
        let right = dist(
            &apply(&alg.product_coeffs(&a, &x)),
            &apply(&alg.product_coeffs(&a, &apply(&x))),
        );
        report.left_bimodule = report.left_bimodule.max(left);
        report.right_bimodule = report.right_bimodule.max(right);
    }
    report.pass = [
        report.bilinearity,
        report.associativity,
        report.unit,
        report.involution,
        report.c_star_identity,
        report.left_bimodule,
        report.right_bimodule,
    ]
    .iter()
    .all(|v| *v <= tol);
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct TroReport {
    pub is_tro: bool,
    pub max_residual: f64,
    /// Basis triple (j, k, l) whose product B_j B_k^T B_l is farthest from the span.
    pub worst_triple: Option<(usize, usize, usize)>,
    pub witness: Option<Mat>,
    pub tol: f64,
}

/// Is Z Z^T Z ⊂ Z? Residuals are relative: ‖res‖ / (1 + ‖product‖_F).
pub fn is_tro(space: &OpSpace, tol: f64) -> TroReport {
    let b = space.basis();
    let d = b.len();
    let mut worst: (f64, Option<(usize, usize, usize)>, Option<Mat>) = (0.0, None, None);
    for j in 0..d {
        for k in 0..d {
            let jk = b[j].matmul(&b[k].transpose());
            for (l, bl) in b.iter().enumerate() {
                let prod = jk.matmul(bl);
                let res = space.span_residual(&prod).0 / (1.0 + prod.frobenius());
                if res > worst.0 {
                    worst = (res, Some((j, k, l)), Some(prod));
                }
            }
        }
    }
    TroReport {
        is_tro: worst.0 <= tol,
        max_residual: worst.0,
        worst_triple: worst.1,
        witness: worst.2,
        tol,
    }
}

/// A space verified to be a ternary ring of operators.
#[derive(Debug, Clone)]
pub struct TroSpace {
    space: OpSpace,
    triple_closure_residual: f64,
}

impl TroSpace {
    pub fn new(space: OpSpace) -> Result<Self> {
        let r = is_tro(&space, CLOSURE_TOL);
        if !r.is_tro {
            return Err(Error::NotClosed {
                what: "space is not closed under x y^T z".into(),
                residual: r.max_residual,
                tol: CLOSURE_TOL,
            });
        }
        Ok(TroSpace {
            space,
            triple_closure_residual: r.max_residual,
        })
    }

    pub fn space(&self) -> &OpSpace {
        &self.space
    }

    pub fn triple_closure_residual(&self) -> f64 {
        self.triple_closure_residual
    }
}

/// The smallest subspace of the ambient containing X and closed under
/// x y^T z. The basis of X comes first, followed by the adjoined elements
/// (normalized in Frobenius norm).
pub fn generated_subtriple(space: &OpSpace, max_iters: usize) -> Result<OpSpace> {
    let (p, q) = space.ambient();
    let mut set: Vec<Mat> = space.basis().to_vec();
    for _ in 0..max_iters {
        let mut added = false;
        let snapshot = set.clone();
        for x in &snapshot {
            for y in &snapshot {
                let xy = x.matmul(&y.transpose());
                for z in &snapshot {
                    let prod = xy.matmul(z);
                    let res = residual_against(&set, &prod);
                    if res > CLOSURE_TOL * (1.0 + prod.frobenius()) {
                        let f = prod.frobenius();
                        set.push(prod.scale(1.0 / f));
                        added = true;
                    }
                }
            }
        }
        if !added {
            return OpSpace::new(p, q, set);
        }
    }
    Err(Error::NoConvergence(format!(
        "triple closure did not stabilize in {max_iters} rounds"
    )))
}

#[derive(Debug, Clone, Serialize)]
pub struct ShilovProduct {
    /// R(y)^T R(z)
    pub value: Mat,
    /// Residual against span{B_j^T B_k}, relative to 1 + ‖value‖_F.
    pub residual: f64,
    pub member: bool,
}

/// ⟨y, z⟩ = y^T z for level-1 elements of a TRO.
pub fn shilov_inner_product(tro: &TroSpace, y: &MatElem, z: &MatElem) -> Result<ShilovProduct> {
    for e in [y, z] {
        if e.level() != 1 {
            return Err(Error::Invalid(
                "the inner product takes level-1 elements".into(),
            ));
        }
    }
    let s = tro.space();
    let value = s.realize(y)?.transpose().matmul(&s.realize(z)?);
    let span: Vec<Mat> = s
        .basis()
        .iter()
        .flat_map(|a| s.basis().iter().map(move |b| a.transpose().matmul(b)))
        .collect();
    let residual = residual_against(&span, &value) / (1.0 + value.frobenius());
    Ok(ShilovProduct {
        member: residual <= CLOSURE_TOL,
        value,
        residual,
    })
}
