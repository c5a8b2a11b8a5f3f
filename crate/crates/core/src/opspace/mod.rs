//! Concrete real operator spaces.
//!
//! A space is a finite list of linearly independent p x q matrices; an element
//! of M_n(X) is stored by its coefficients over that basis and realized as an
//! (np) x (nq) block matrix whose (i, j) block is `sum_k c[i][j][k] B_k`. The
//! matrix norms of X are the operator norms of these realizations.
//!
//! The complexification X_c is realized inside M_2(X) as the blocks
//! `[[x, -y], [y, x]]`. Its basis lists the real parts `diag(B_k, B_k)` first
//! and the imaginary parts `[[0, -B_k], [B_k, 0]]` second, so conjugation
//! negates the second half of every coefficient vector.

mod cb;
mod quotient;
mod theta;

pub use cb::{cb_profile, level_cb_norm_lower, sampled_level_ratio, CbEstimate, CbOptions};
pub(crate) use cb::{ratio_ascent, ratio_polish, ratio_search, RatioTerm};
pub use quotient::{
    complex_quotient_norms, quotient_level_norm, ComplexQuotient, QuotientNorm, QuotientOptions,
};
pub use theta::{theta_block, theta_dual_norm_lower, ThetaOptions, ThetaReport};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{shape_err, Error, Result};
use crate::linalg::{self, complex_structure, Mat};
use crate::rng;

/// Singular-value threshold for the basis independence check.
pub const BASIS_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OpSpace {
    rows: usize,
    cols: usize,
    basis: Vec<Mat>,
    complexified: bool,
    condition: f64,
}

impl OpSpace {
    /// Builds a real (non-complexified) space, rejecting dependent bases.
    pub fn new(rows: usize, cols: usize, basis: Vec<Mat>) -> Result<Self> {
        Self::build(rows, cols, basis, false)
    }

    /// Builds a space already laid out as a complexification (real parts
    /// followed by imaginary parts) and checks the complex structure.
    pub fn new_complexified(rows: usize, cols: usize, basis: Vec<Mat>) -> Result<Self> {
        let space = Self::build(rows, cols, basis, true)?;
        space.check_complex_structure()?;
        Ok(space)
    }

    fn build(rows: usize, cols: usize, basis: Vec<Mat>, complexified: bool) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Invalid("ambient dimensions must be positive".into()));
        }
        if basis.is_empty() {
            return Err(Error::Invalid("basis must be nonempty".into()));
        }
        for (k, b) in basis.iter().enumerate() {
            if b.shape() != (rows, cols) {
                return Err(shape_err(
                    format!("basis matrices of shape {rows}x{cols}"),
                    format!("basis[{k}] of shape {}x{}", b.rows(), b.cols()),
                ));
            }
            b.check_finite()?;
        }
        let gram = vectorized(&basis);
        let s = linalg::singular_values(&gram);
        let smallest = *s.last().unwrap();
        if basis.len() > rows * cols || smallest <= BASIS_RANK_TOL {
            return Err(Error::RankDeficient {
                smallest: if basis.len() > rows * cols {
                    0.0
                } else {
                    smallest
                },
                threshold: BASIS_RANK_TOL,
            });
        }
        Ok(OpSpace {
            rows,
            cols,
            condition: s[0] / smallest,
            basis,
            complexified,
        })
    }

    /// The full matrix space M_{p,q}(R) with the matrix-unit basis in row-major order.
    pub fn full(rows: usize, cols: usize) -> Self {
        let basis = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| Mat::unit(rows, cols, i, j)))
            .collect();
        Self::new(rows, cols, basis).expect("matrix units are independent")
    }

    /// R = span{[1]} inside M_1.
    pub fn scalars() -> Self {
        Self::new(1, 1, vec![Mat::identity(1)]).expect("nonzero scalar")
    }

    fn check_complex_structure(&self) -> Result<()> {
        let d = self.dim();
        if !self.rows.is_multiple_of(2) || !self.cols.is_multiple_of(2) || !d.is_multiple_of(2) {
            return Err(Error::Invalid(
                "complexified space needs even ambient dimensions and even basis size".into(),
            ));
        }
        let h = d / 2;
        let jl = complex_structure(self.rows / 2);
        let jr = complex_structure(self.cols / 2);
        let jr_inv = jr.transpose();
        let tol = 1e-10;
        for k in 0..h {
            let b = &self.basis[k];
            let scale = 1.0 + b.max_abs();
            let imag = jl.matmul(b);
            let dev = imag.max_abs_diff(&self.basis[h + k]);
            if dev > tol * scale {
                return Err(Error::NotClosed {
                    what: format!("imaginary basis element {} is not J * basis[{k}]", h + k),
                    residual: dev,
                    tol,
                });
            }
            for cand in [b, &self.basis[h + k]] {
                let conj = jl.matmul(cand).matmul(&jr_inv);
                let (res, _) = self.span_residual(&conj);
                if res > tol * scale {
                    return Err(Error::NotClosed {
                        what: "span is not invariant under J x J^-1".into(),
                        residual: res,
                        tol,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    pub fn is_complexified(&self) -> bool {
        self.complexified
    }

    /// Ratio of extreme singular values of the vectorized basis.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// The ambient matrix sum_k c_k B_k.
    pub fn combine(&self, coeffs: &[f64]) -> Mat {
        assert_eq!(coeffs.len(), self.dim(), "coefficient length");
        let mut out = Mat::zeros(self.rows, self.cols);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if *c != 0.0 {
                out.axpy(*c, b);
            }
        }
        out
    }

    /// Least-squares coordinates of an ambient matrix and the Frobenius residual.
    pub fn span_residual(&self, m: &Mat) -> (f64, Vec<f64>) {
        let a = vectorized(&self.basis);
        let b = Mat::from_vec(m.rows() * m.cols(), 1, m.as_slice().to_vec()).expect("finite");
        let (x, res) = linalg::lstsq(&a, &b, 1e-13);
        (res, x.into_vec())
    }

    /// Coordinates of an ambient matrix that lies in the span.
    pub fn coordinates(&self, m: &Mat, tol: f64) -> Result<Vec<f64>> {
        if m.shape() != self.ambient() {
            return Err(shape_err(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        let (res, x) = self.span_residual(m);
        if res > tol * (1.0 + m.frobenius()) {
            return Err(Error::NotClosed {
                what: "matrix is not in the span of the basis".into(),
                residual: res,
                tol,
            });
        }
        Ok(x)
    }

    /// The ambient realization of an element of M_n(X).
    pub fn realize(&self, x: &MatElem) -> Result<Mat> {
        self.check_elem(x)?;
        Ok(self.realize_unchecked(x))
    }

    pub(crate) fn realize_unchecked(&self, x: &MatElem) -> Mat {
        let n = x.level;
        let (p, q) = (self.rows, self.cols);
        let mut out = Mat::zeros(n * p, n * q);
        for i in 0..n {
            for j in 0..n {
                let c = x.entry(i, j);
                for (k, b) in self.basis.iter().enumerate() {
                    let ck = c[k];
                    if ck == 0.0 {
                        continue;
                    }
                    for r in 0..p {
                        for s in 0..q {
                            out[(i * p + r, j * q + s)] += ck * b[(r, s)];
                        }
                    }
                }
            }
        }
        out
    }

    /// Gradient of `u^T R(c) v` with respect to the coefficients c at level n.
    pub(crate) fn bilinear_gradient(&self, n: usize, u: &[f64], v: &[f64]) -> Vec<f64> {
        let (p, q) = (self.rows, self.cols);
        let d = self.dim();
        let mut g = vec![0.0; n * n * d];
        for i in 0..n {
            let ui = &u[i * p..(i + 1) * p];
            for j in 0..n {
                let vj = &v[j * q..(j + 1) * q];
                for (k, b) in self.basis.iter().enumerate() {
                    let mut acc = 0.0;
                    for r in 0..p {
                        if ui[r] == 0.0 {
                            continue;
                        }
                        let row = b.row(r);
                        acc += ui[r] * row.iter().zip(vj).map(|(a, b)| a * b).sum::<f64>();
                    }
                    g[(i * n + j) * d + k] = acc;
                }
            }
        }
        g
    }

    pub fn check_elem(&self, x: &MatElem) -> Result<()> {
        if x.dim != self.dim() {
            return Err(shape_err(
                format!("coefficients over a {}-dimensional basis", self.dim()),
                format!("{} coefficients per entry", x.dim),
            ));
        }
        Ok(())
    }

    /// Gaussian element of M_n(X).
    pub fn random_elem(&self, n: usize, rng: &mut rng::Stream) -> MatElem {
        MatElem::from_flat(n, self.dim(), rng::gaussian_vec(rng, n * n * self.dim()))
    }

    /// The conjugation x + iy -> x - iy on a complexified space.
    pub fn conjugate(&self, x: &MatElem) -> Result<MatElem> {
        if !self.complexified {
            return Err(Error::NotComplexified);
        }
        self.check_elem(x)?;
        let h = self.dim() / 2;
        let mut out = x.clone();
        for e in out.coeffs.chunks_mut(self.dim()) {
            for c in &mut e[h..] {
                *c = -*c;
            }
        }
        Ok(out)
    }
}

fn vectorized(basis: &[Mat]) -> Mat {
    let (p, q) = basis[0].shape();
    let mut a = Mat::zeros(p * q, basis.len());
    for (k, b) in basis.iter().enumerate() {
        for (idx, v) in b.as_slice().iter().enumerate() {
            a[(idx, k)] = *v;
        }
    }
    a
}

/// An element of M_n(X): an n x n array of coefficient vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct MatElem {
    level: usize,
    dim: usize,
    coeffs: Vec<f64>,
}

impl MatElem {
    pub fn zeros(level: usize, dim: usize) -> Self {
        MatElem {
            level,
            dim,
            coeffs: vec![0.0; level * level * dim],
        }
    }

    /// Flat coefficients indexed `(i * n + j) * d + k`.
    pub fn from_flat(level: usize, dim: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), level * level * dim, "coefficient tensor size");
        MatElem { level, dim, coeffs }
    }

    pub fn from_nested(coeffs: &[Vec<Vec<f64>>]) -> Result<Self> {
        let n = coeffs.len();
        if n == 0 {
            return Err(Error::Invalid("level must be positive".into()));
        }
        let d = coeffs[0].first().map_or(0, Vec::len);
        if d == 0 {
            return Err(Error::Invalid(
                "coefficient vectors must be nonempty".into(),
            ));
        }
        let mut flat = Vec::with_capacity(n * n * d);
        for (i, row) in coeffs.iter().enumerate() {
            if row.len() != n {
                return Err(shape_err(
                    format!("{n} entries in row {i}"),
                    row.len().to_string(),
                ));
            }
            for (j, v) in row.iter().enumerate() {
                if v.len() != d {
                    return Err(shape_err(
                        format!("{d} coefficients"),
                        format!("{} at entry ({i}, {j})", v.len()),
                    ));
                }
                if let Some(bad) = v.iter().position(|c| !c.is_finite()) {
                    return Err(Error::Invalid(format!(
                        "non-finite coefficient at ({i}, {j}, {bad})"
                    )));
                }
                flat.extend_from_slice(v);
            }
        }
        Ok(MatElem::from_flat(n, d, flat))
    }

    /// Level-1 element with the given coefficients.
    pub fn scalar(coeffs: Vec<f64>) -> Self {
        let d = coeffs.len();
        MatElem::from_flat(1, d, coeffs)
    }

    /// The element whose only nonzero entry is basis vector k at position (i, j).
    pub fn basis_unit(level: usize, dim: usize, i: usize, j: usize, k: usize) -> Self {
        let mut e = MatElem::zeros(level, dim);
        e.entry_mut(i, j)[k] = 1.0;
        e
    }

    /// Builds an element from an n x n array of scalar matrices, one per basis vector:
    /// entry (i, j) has coefficient `mats[k][(i, j)]` on basis vector k.
    pub fn from_coefficient_matrices(mats: &[Mat]) -> Result<Self> {
        let d = mats.len();
        let n = mats.first().map_or(0, Mat::rows);
        if d == 0 || n == 0 {
            return Err(Error::Invalid(
                "need at least one nonempty coefficient matrix".into(),
            ));
        }
        let mut e = MatElem::zeros(n, d);
        for (k, m) in mats.iter().enumerate() {
            if m.shape() != (n, n) {
                return Err(shape_err(
                    format!("{n}x{n}"),
                    format!("{}x{}", m.rows(), m.cols()),
                ));
            }
            for i in 0..n {
                for j in 0..n {
                    e.entry_mut(i, j)[k] = m[(i, j)];
                }
            }
        }
        Ok(e)
    }

    /// The scalar matrix of coefficients on basis vector k.
    pub fn coefficient_matrix(&self, k: usize) -> Mat {
        let n = self.level;
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.entry(i, j)[k];
            }
        }
        m
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn entry(&self, i: usize, j: usize) -> &[f64] {
        let s = (i * self.level + j) * self.dim;
        &self.coeffs[s..s + self.dim]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let s = (i * self.level + j) * self.dim;
        &mut self.coeffs[s..s + self.dim]
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.level)
            .map(|i| (0..self.level).map(|j| self.entry(i, j).to_vec()).collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        MatElem {
            level: self.level,
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &MatElem) -> Self {
        assert_eq!((self.level, self.dim), (other.level, other.dim));
        MatElem {
            level: self.level,
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &MatElem) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// x (+) y at level n + m.
    pub fn direct_sum(&self, other: &MatElem) -> Self {
        assert_eq!(self.dim, other.dim);
        let (n, m) = (self.level, other.level);
        let mut out = MatElem::zeros(n + m, self.dim);
        for i in 0..n {
            for j in 0..n {
                out.entry_mut(i, j).copy_from_slice(self.entry(i, j));
            }
        }
        for i in 0..m {
            for j in 0..m {
                out.entry_mut(n + i, n + j)
                    .copy_from_slice(other.entry(i, j));
            }
        }
        out
    }

    /// Pads with zero rows and columns up to the given level.
    pub fn pad_to(&self, level: usize) -> Self {
        assert!(level >= self.level);
        if level == self.level {
            return self.clone();
        }
        self.direct_sum(&MatElem::zeros(level - self.level, self.dim))
    }

    /// alpha x beta for scalar n x n matrices alpha, beta.
    pub fn sandwich(&self, alpha: &Mat, beta: &Mat) -> Self {
        let n = self.level;
        assert_eq!(alpha.shape(), (n, n));
        assert_eq!(beta.shape(), (n, n));
        let mut out = MatElem::zeros(n, self.dim);
        for i in 0..n {
            for j in 0..n {
                let dst_start = (i * n + j) * self.dim;
                for k in 0..n {
                    for l in 0..n {
                        let w = alpha[(i, k)] * beta[(l, j)];
                        if w == 0.0 {
                            continue;
                        }
                        let src = (k * n + l) * self.dim;
                        for t in 0..self.dim {
                            out.coeffs[dst_start + t] += w * self.coeffs[src + t];
                        }
                    }
                }
            }
        }
        out
    }

    /// Applies a d' x d coefficient matrix to every entry.
    pub fn map_entries(&self, m: &Mat) -> Self {
        assert_eq!(m.cols(), self.dim, "map domain dimension");
        let d2 = m.rows();
        let mut out = MatElem::zeros(self.level, d2);
        for (src, dst) in self.coeffs.chunks(self.dim).zip(out.coeffs.chunks_mut(d2)) {
            dst.copy_from_slice(&m.matvec(src));
        }
        out
    }

    /// Concatenates coefficient vectors entrywise: (x, y) -> the element with
    /// coefficients [x_k, y_k] at every entry.
    pub fn concat(&self, other: &MatElem) -> Self {
        assert_eq!(self.level, other.level);
        let d = self.dim + other.dim;
        let mut out = MatElem::zeros(self.level, d);
        for e in 0..self.level * self.level {
            out.coeffs[e * d..e * d + self.dim]
                .copy_from_slice(&self.coeffs[e * self.dim..(e + 1) * self.dim]);
            out.coeffs[e * d + self.dim..(e + 1) * d]
                .copy_from_slice(&other.coeffs[e * other.dim..(e + 1) * other.dim]);
        }
        out
    }

    /// Splits each coefficient vector at `at`.
    pub fn split(&self, at: usize) -> (MatElem, MatElem) {
        assert!(at <= self.dim);
        let mut a = MatElem::zeros(self.level, at);
        let mut b = MatElem::zeros(self.level, self.dim - at);
        for e in 0..self.level * self.level {
            let src = &self.coeffs[e * self.dim..(e + 1) * self.dim];
            a.coeffs[e * at..(e + 1) * at].copy_from_slice(&src[..at]);
            b.coeffs[e * (self.dim - at)..(e + 1) * (self.dim - at)].copy_from_slice(&src[at..]);
        }
        (a, b)
    }

    /// The 2n-level element [[x, -y], [y, x]].
    pub fn complex_block(x: &MatElem, y: &MatElem) -> Self {
        assert_eq!((x.level, x.dim), (y.level, y.dim));
        let n = x.level;
        let mut out = MatElem::zeros(2 * n, x.dim);
        for i in 0..n {
            for j in 0..n {
                for t in 0..x.dim {
                    let (xv, yv) = (x.entry(i, j)[t], y.entry(i, j)[t]);
                    out.entry_mut(i, j)[t] = xv;
                    out.entry_mut(i, n + j)[t] = -yv;
                    out.entry_mut(n + i, j)[t] = yv;
                    out.entry_mut(n + i, n + j)[t] = xv;
                }
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct MatElemJson {
    level: usize,
    coeffs: Vec<Vec<Vec<f64>>>,
}

impl Serialize for MatElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatElemJson {
            level: self.level,
            coeffs: self.to_nested(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatElem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatElemJson::deserialize(d)?;
        if j.coeffs.len() != j.level {
            return Err(serde::de::Error::custom(format!(
                "\"level\" is {} but \"coeffs\" has {} rows",
                j.level,
                j.coeffs.len()
            )));
        }
        MatElem::from_nested(&j.coeffs).map_err(serde::de::Error::custom)
    }
}

/// A linear map between concrete spaces given by its d_Y x d_X coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CBMap {
    domain: OpSpace,
    codomain: OpSpace,
    matrix: Mat,
}

impl CBMap {
    pub fn new(domain: OpSpace, codomain: OpSpace, matrix: Mat) -> Result<Self> {
        if matrix.shape() != (codomain.dim(), domain.dim()) {
            return Err(shape_err(
                format!("{}x{} coefficient matrix", codomain.dim(), domain.dim()),
                format!("{}x{}", matrix.rows(), matrix.cols()),
            ));
        }
        matrix.check_finite()?;
        Ok(CBMap {
            domain,
            codomain,
            matrix,
        })
    }

    pub fn identity(space: &OpSpace) -> Self {
        CBMap {
            domain: space.clone(),
            codomain: space.clone(),
            matrix: Mat::identity(space.dim()),
        }
    }

    pub fn scaling(space: &OpSpace, lambda: f64) -> Self {
        CBMap {
            domain: space.clone(),
            codomain: space.clone(),
            matrix: Mat::identity(space.dim()).scale(lambda),
        }
    }

    /// The endomap whose action on ambient matrices is `f`, read off on the basis.
    /// Fails when `f` leaves the space.
    pub fn from_ambient_fn(space: &OpSpace, f: impl Fn(&Mat) -> Mat) -> Result<Self> {
        let d = space.dim();
        let mut m = Mat::zeros(d, d);
        for (k, b) in space.basis().iter().enumerate() {
            let coords = space.coordinates(&f(b), 1e-10)?;
            for (r, c) in coords.iter().enumerate() {
                m[(r, k)] = *c;
            }
        }
        CBMap::new(space.clone(), space.clone(), m)
    }

    pub fn domain(&self) -> &OpSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &OpSpace {
        &self.codomain
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn is_endomap(&self) -> bool {
        self.domain == self.codomain
    }

    /// The amplification u_n, applied coefficientwise.
    pub fn apply(&self, x: &MatElem) -> Result<MatElem> {
        self.domain.check_elem(x)?;
        Ok(x.map_entries(&self.matrix))
    }

    pub fn compose(&self, inner: &CBMap) -> Result<CBMap> {
        if inner.codomain.dim() != self.domain.dim() {
            return Err(shape_err(
                format!("inner codomain of dimension {}", self.domain.dim()),
                inner.codomain.dim().to_string(),
            ));
        }
        CBMap::new(
            inner.domain.clone(),
            self.codomain.clone(),
            self.matrix.matmul(&inner.matrix),
        )
    }

    /// ‖u_n(x)‖ / ‖x‖ for one element; 0 for x = 0.
    pub fn level_ratio(&self, x: &MatElem) -> Result<f64> {
        let den = level_norm(&self.domain, x)?;
        if den == 0.0 {
            return Ok(0.0);
        }
        Ok(level_norm(&self.codomain, &self.apply(x)?)? / den)
    }
}

/// ‖x‖_n: the operator norm of the realization of x.
pub fn level_norm(space: &OpSpace, x: &MatElem) -> Result<f64> {
    Ok(linalg::spectral_norm(&space.realize(x)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct RuanReport {
    pub max_level: usize,
    pub samples: usize,
    pub skipped: usize,
    /// max |‖x ⊕ y‖ - max(‖x‖, ‖y‖)|
    pub direct_sum_violation: f64,
    /// max(0, ‖αxβ‖ - ‖α‖‖x‖‖β‖)
    pub bimodule_violation: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn check_ruan_axioms(
    space: &OpSpace,
    max_level: usize,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<RuanReport> {
    if max_level < 2 {
        return Err(Error::Invalid(
            "Ruan axiom check needs max_level >= 2".into(),
        ));
    }
    let mut sum_viol: f64 = 0.0;
    let mut bimod_viol: f64 = 0.0;
    let mut skipped = 0;
    for s in 0..samples {
        let mut r = rng::stream(seed, &[s as u64]);
        let n = 1 + (rng::uniform(&mut r, 0.0, max_level as f64) as usize).min(max_level - 1);
        let m = 1 + (rng::uniform(&mut r, 0.0, max_level as f64) as usize).min(max_level - 1);
        let x = space.random_elem(n, &mut r);
        let y = space.random_elem(m, &mut r);
        if x.is_zero() || y.is_zero() {
            skipped += 1;
            continue;
        }
        let nx = level_norm(space, &x)?;
        let ny = level_norm(space, &y)?;
        let nsum = level_norm(space, &x.direct_sum(&y))?;
        sum_viol = sum_viol.max((nsum - nx.max(ny)).abs());

        let alpha = rng::gaussian_mat(&mut r, n, n);
        let beta = rng::gaussian_mat(&mut r, n, n);
        let lhs = level_norm(space, &x.sandwich(&alpha, &beta))?;
        let rhs = linalg::spectral_norm(&alpha) * nx * linalg::spectral_norm(&beta);
        bimod_viol = bimod_viol.max(lhs - rhs);
    }
    Ok(RuanReport {
        max_level,
        samples,
        skipped,
        direct_sum_violation: sum_viol,
        bimodule_violation: bimod_viol.max(0.0),
        tol,
        pass: sum_viol <= tol && bimod_viol <= tol,
    })
}

/// X_c realized inside M_2(X), with basis {diag(B_k, B_k)} then {[[0, -B_k], [B_k, 0]]}.
pub fn complexify_space(space: &OpSpace) -> Result<OpSpace> {
    if space.complexified {
        return Err(Error::AlreadyComplexified);
    }
    let (p, q) = space.ambient();
    let zero = Mat::zeros(p, q);
    let real = space
        .basis
        .iter()
        .map(|b| Mat::from_blocks(&[vec![b, &zero], vec![&zero, b]]));
    let imag = space.basis.iter().map(|b| {
        let nb = b.scale(-1.0);
        Mat::from_blocks(&[vec![&zero, &nb], vec![b, &zero]])
    });
    let basis: Vec<Mat> = real.chain(imag).collect();
    Ok(OpSpace {
        rows: 2 * p,
        cols: 2 * q,
        condition: space.condition,
        basis,
        complexified: true,
    })
}

/// The element x + iy of M_n(X_c) for x, y in M_n(X).
pub fn complex_elem(x: &MatElem, y: &MatElem) -> Result<MatElem> {
    if x.level != y.level {
        return Err(Error::LevelMismatch(x.level, y.level));
    }
    if x.dim != y.dim {
        return Err(shape_err(format!("dimension {}", x.dim), y.dim.to_string()));
    }
    Ok(x.concat(y))
}

/// ‖x + iy‖_n in the complexification of a real space.
pub fn complexification_norm(space: &OpSpace, x: &MatElem, y: &MatElem) -> Result<f64> {
    space.check_elem(x)?;
    space.check_elem(y)?;
    let xc = complexify_space(space)?;
    level_norm(&xc, &complex_elem(x, y)?)
}

/// T_c(x + iy) = T(x) + iT(y).
pub fn complexify_map(u: &CBMap) -> Result<CBMap> {
    let dom = complexify_space(&u.domain)?;
    let cod = complexify_space(&u.codomain)?;
    let m = u.matrix.direct_sum(&u.matrix);
    CBMap::new(dom, cod, m)
}

/// ⊕_k X_k with block-diagonal ambient; the basis lists each summand's basis in order.
pub fn direct_sum_spaces(spaces: &[OpSpace]) -> Result<OpSpace> {
    if spaces.is_empty() {
        return Err(Error::Invalid("direct sum of an empty list".into()));
    }
    let rows: usize = spaces.iter().map(|s| s.rows).sum();
    let cols: usize = spaces.iter().map(|s| s.cols).sum();
    let mut basis = Vec::new();
    let (mut r0, mut c0) = (0, 0);
    for s in spaces {
        for b in &s.basis {
            let mut m = Mat::zeros(rows, cols);
            m.set_block(r0, c0, b);
            basis.push(m);
        }
        r0 += s.rows;
        c0 += s.cols;
    }
    OpSpace::new(rows, cols, basis)
}

/// Coefficients of (x_1, ..., x_k) in the direct sum, given elements of each summand.
pub fn direct_sum_elem(parts: &[MatElem]) -> Result<MatElem> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Invalid("no summands".into()))?;
    let mut acc = first.clone();
    for p in &parts[1..] {
        if p.level != acc.level {
            return Err(Error::LevelMismatch(acc.level, p.level));
        }
        acc = acc.concat(p);
    }
    Ok(acc)
}

/// C_2(X): the column space [X; X] in a 2p x q ambient, basis {[B_k; 0]} then {[0; B_k]}.
pub fn column_space(space: &OpSpace) -> OpSpace {
    let (p, q) = space.ambient();
    let zero = Mat::zeros(p, q);
    let top = space.basis.iter().map(|b| b.vstack(&zero));
    let bottom = space.basis.iter().map(|b| zero.vstack(b));
    OpSpace {
        rows: 2 * p,
        cols: q,
        condition: space.condition,
        basis: top.chain(bottom).collect(),
        complexified: false,
    }
}

/// JSON form of a space: {"ambient": {"rows", "cols"}, "basis": [Mat], "complexified": bool}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpSpaceJson {
    pub ambient: Ambient,
    pub basis: Vec<Mat>,
    #[serde(default)]
    pub complexified: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Ambient {
    pub rows: usize,
    pub cols: usize,
}

impl From<&OpSpace> for OpSpaceJson {
    fn from(s: &OpSpace) -> Self {
        OpSpaceJson {
            ambient: Ambient {
                rows: s.rows,
                cols: s.cols,
            },
            basis: s.basis.clone(),
            complexified: s.complexified,
        }
    }
}

impl TryFrom<OpSpaceJson> for OpSpace {
    type Error = Error;
    fn try_from(j: OpSpaceJson) -> Result<Self> {
        if j.complexified {
            OpSpace::new_complexified(j.ambient.rows, j.ambient.cols, j.basis)
        } else {
            OpSpace::new(j.ambient.rows, j.ambient.cols, j.basis)
        }
    }
}

impl Serialize for OpSpace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OpSpaceJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for OpSpace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        OpSpace::try_from(OpSpaceJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn a_mat() -> Mat {
        Mat::diag(&[1.0, -1.0])
    }

    fn b_mat() -> Mat {
        Mat::rows_of(&[[0.0, 1.0], [1.0, 0.0]])
    }

    /// Coefficients over the matrix units of M_2 for an ambient 2x2 matrix.
    fn m2_coeffs(m: &Mat) -> Vec<f64> {
        m.as_slice().to_vec()
    }

    #[test]
    fn level_norm_examples() {
        let m2 = OpSpace::full(2, 2);
        let id = MatElem::scalar(m2_coeffs(&Mat::identity(2)));
        assert_abs_diff_eq!(level_norm(&m2, &id).unwrap(), 1.0, epsilon = 1e-15);

        let two = OpSpace::new(1, 1, vec![Mat::rows_of(&[[2.0]])]).unwrap();
        assert_abs_diff_eq!(
            level_norm(&two, &MatElem::scalar(vec![1.0])).unwrap(),
            2.0,
            epsilon = 1e-15
        );

        // E11 ⊗ A + E22 ⊗ B: block diagonal, oracle max(‖A‖, ‖B‖) = 1
        let mut x = MatElem::zeros(2, 4);
        x.entry_mut(0, 0).copy_from_slice(&m2_coeffs(&a_mat()));
        x.entry_mut(1, 1).copy_from_slice(&m2_coeffs(&b_mat()));
        let oracle = linalg::op_norm(&a_mat())
            .unwrap()
            .max(linalg::op_norm(&b_mat()).unwrap());
        assert_abs_diff_eq!(level_norm(&m2, &x).unwrap(), oracle, epsilon = 1e-14);
        assert_abs_diff_eq!(oracle, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn level_norm_rejects_wrong_dim() {
        let m2 = OpSpace::full(2, 2);
        assert!(matches!(
            level_norm(&m2, &MatElem::scalar(vec![1.0, 2.0])),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn dependent_basis_rejected() {
        let e = Mat::unit(2, 2, 0, 0);
        let r = OpSpace::new(2, 2, vec![e.clone(), e.scale(2.0)]);
        assert!(matches!(r, Err(Error::RankDeficient { .. })));
        let r = OpSpace::new(2, 2, vec![Mat::zeros(2, 2)]);
        assert!(matches!(r, Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn complexify_scalars_block_form() {
        let c = complexify_space(&OpSpace::scalars()).unwrap();
        assert_eq!(c.dim(), 2);
        assert_eq!(c.basis()[0], Mat::identity(2));
        assert_eq!(c.basis()[1], Mat::rows_of(&[[0.0, -1.0], [1.0, 0.0]]));
        assert!(c.is_complexified());
        assert_eq!(complexify_space(&OpSpace::full(2, 2)).unwrap().dim(), 8);
        assert_eq!(complexify_space(&c), Err(Error::AlreadyComplexified));
    }

    #[test]
    fn complexification_norm_examples() {
        let r = OpSpace::scalars();
        let one = MatElem::scalar(vec![1.0]);
        assert_abs_diff_eq!(
            complexification_norm(&r, &one, &one).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-14
        );
        let m2 = OpSpace::full(2, 2);
        let x = MatElem::scalar(m2_coeffs(&a_mat()));
        let y = MatElem::scalar(m2_coeffs(&b_mat()));
        // brute-force oracle: SVD of the assembled 4x4 block matrix
        let block = linalg::complex_realize(&a_mat(), &b_mat());
        let oracle = linalg::svd(&block).s[0];
        assert_abs_diff_eq!(
            complexification_norm(&m2, &x, &y).unwrap(),
            oracle,
            epsilon = 1e-13
        );
        let zero = MatElem::zeros(1, 4);
        assert_abs_diff_eq!(
            complexification_norm(&m2, &x, &zero).unwrap(),
            level_norm(&m2, &x).unwrap(),
            epsilon = 1e-15
        );
        let lvl2 = MatElem::zeros(2, 4);
        assert_eq!(
            complexification_norm(&m2, &x, &lvl2),
            Err(Error::LevelMismatch(1, 2))
        );
    }

    #[test]
    fn complexified_json_is_validated() {
        let c = complexify_space(&OpSpace::full(2, 2)).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: OpSpace = serde_json::from_str(&s).unwrap();
        assert_eq!(back.dim(), 8);
        assert!(back.is_complexified());

        // swapping two imaginary basis elements breaks the real/imaginary pairing
        let mut j = OpSpaceJson::from(&c);
        j.basis.swap(4, 5);
        assert!(OpSpace::try_from(j).is_err());
    }

    #[test]
    fn direct_sum_examples() {
        let r = OpSpace::scalars();
        let rr = direct_sum_spaces(&[r.clone(), r.clone()]).unwrap();
        let x =
            direct_sum_elem(&[MatElem::scalar(vec![3.0]), MatElem::scalar(vec![-4.0])]).unwrap();
        assert_abs_diff_eq!(level_norm(&rr, &x).unwrap(), 4.0, epsilon = 1e-14);

        let single = direct_sum_spaces(&[OpSpace::full(2, 2)]).unwrap();
        let y = MatElem::scalar(vec![1.0, 2.0, -3.0, 0.5]);
        assert_eq!(
            level_norm(&single, &y).unwrap(),
            level_norm(&OpSpace::full(2, 2), &y).unwrap()
        );
    }

    #[test]
    fn maps_amplify_coefficientwise() {
        let m2 = OpSpace::full(2, 2);
        let t = CBMap::from_ambient_fn(&m2, Mat::transpose).unwrap();
        let x = MatElem::scalar(m2_coeffs(&Mat::rows_of(&[[1.0, 2.0], [3.0, 4.0]])));
        let tx = t.apply(&x).unwrap();
        assert_eq!(tx.coeffs(), &[1.0, 3.0, 2.0, 4.0]);
        let tc = complexify_map(&CBMap::identity(&m2)).unwrap();
        assert_eq!(tc.matrix(), &Mat::identity(8));
    }

    #[test]
    fn ruan_requires_level_two() {
        assert!(check_ruan_axioms(&OpSpace::scalars(), 1, 10, 0, 1e-10).is_err());
    }
}
