//! Dense real matrices and the exact kernels everything else is built on:
//! singular values (one-sided Jacobi), symmetric eigenvalues (cyclic Jacobi),
//! least squares, Cholesky, and the matrix exponential.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{shape_err, Error, Result};

/// Default tolerance for boolean classifications.
pub const CLASSIFY_TOL: f64 = 1e-9;
/// Default tolerance for exact linear-algebra identities.
pub const EXACT_TOL: f64 = 1e-12;

/// Dense row-major real matrix.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Mat::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Matrix unit e_{ij} of the given shape.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Mat::zeros(rows, cols);
        m[(i, j)] = 1.0;
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(shape_err(
                format!("{} entries", rows * cols),
                format!("{}", data.len()),
            ));
        }
        let m = Mat { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != c {
                return Err(shape_err(
                    format!("row of length {c}"),
                    format!("row {i} of length {}", row.len()),
                ));
            }
            data.extend_from_slice(row);
        }
        Mat::from_vec(r, c, data)
    }

    /// Panicking constructor for literals in tests and fixed examples.
    pub fn rows_of<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        Mat::from_rows(rows).expect("well-formed matrix literal")
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(p) => Err(Error::NonFinite {
                row: p / self.cols.max(1),
                col: p % self.cols.max(1),
            }),
            None => Ok(()),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn col(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(
            self.cols,
            other.rows,
            "matmul shape mismatch {:?} x {:?}",
            self.shape(),
            other.shape()
        );
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    fn zip_with(&self, other: &Mat, f: impl Fn(f64, f64) -> f64) -> Mat {
        assert_eq!(self.shape(), other.shape(), "elementwise shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.zip_with(other, |a, b| a - b)
    }

    /// self += s * other
    pub fn axpy(&mut self, s: f64, other: &Mat) {
        assert_eq!(self.shape(), other.shape(), "axpy shape mismatch");
        for (d, &o) in self.data.iter_mut().zip(&other.data) {
            *d += s * o;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Mat) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Kronecker product; block (i, j) of the result is self[i][j] * other.
    pub fn kron(&self, other: &Mat) -> Mat {
        let (p, q) = other.shape();
        let mut out = Mat::zeros(self.rows * p, self.cols * q);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == 0.0 {
                    continue;
                }
                for r in 0..p {
                    for c in 0..q {
                        out[(i * p + r, j * q + c)] = a * other[(r, c)];
                    }
                }
            }
        }
        out
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat {
        let mut out = Mat::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out[(r, c)] = self[(r0 + r, c0 + c)];
            }
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Mat) {
        for r in 0..b.rows {
            for c in 0..b.cols {
                self[(r0 + r, c0 + c)] = b[(r, c)];
            }
        }
    }

    /// Assembles a block matrix from a grid; all blocks in a grid row share a
    /// height, all blocks in a grid column share a width.
    pub fn from_blocks(grid: &[Vec<&Mat>]) -> Mat {
        let heights: Vec<usize> = grid.iter().map(|row| row[0].rows).collect();
        let widths: Vec<usize> = grid[0].iter().map(|b| b.cols).collect();
        let mut out = Mat::zeros(heights.iter().sum(), widths.iter().sum());
        let mut r0 = 0;
        for (bi, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in row.iter().enumerate() {
                assert_eq!(b.shape(), (heights[bi], widths[bj]), "block grid mismatch");
                out.set_block(r0, c0, b);
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        out
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows + other.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, other);
        out
    }

    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Mat {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn hstack(&self, other: &Mat) -> Mat {
        Mat::from_blocks(&[vec![self, other]])
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn permute_rows(&self, perm: &[usize]) -> Mat {
        assert_eq!(perm.len(), self.rows);
        let mut out = Mat::zeros(self.rows, self.cols);
        for (dst, &src) in perm.iter().enumerate() {
            out.data[dst * self.cols..(dst + 1) * self.cols].copy_from_slice(self.row(src));
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct MatJson {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<f64>>,
}

impl Serialize for Mat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.to_rows(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatJson::deserialize(d)?;
        if j.entries.len() != j.rows {
            return Err(serde::de::Error::custom(format!(
                "\"rows\" is {} but \"entries\" has {} rows",
                j.rows,
                j.entries.len()
            )));
        }
        if let Some((i, r)) = j
            .entries
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != j.cols)
        {
            return Err(serde::de::Error::custom(format!(
                "\"cols\" is {} but entries row {i} has {} values",
                j.cols,
                r.len()
            )));
        }
        if j.rows == 0 || j.cols == 0 {
            return Err(serde::de::Error::custom(
                "matrix dimensions must be positive",
            ));
        }
        Mat::from_vec(j.rows, j.cols, j.entries.concat()).map_err(serde::de::Error::custom)
    }
}

/// Thin singular value decomposition, singular values in descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    /// rows x k, columns are left singular vectors (zero columns for zero singular values)
    pub u: Mat,
    pub s: Vec<f64>,
    /// cols x k
    pub v: Mat,
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(m: &Mat) -> Svd {
    if m.rows < m.cols {
        let t = svd(&m.transpose());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    let (rows, n) = m.shape();
    // column-major working copies
    let mut a: Vec<Vec<f64>> = (0..n).map(|c| m.col(c)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|c| {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            e
        })
        .collect();
    let eps = f64::EPSILON;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&a[p], &a[q]);
                    let mut al = 0.0;
                    let mut be = 0.0;
                    let mut ga = 0.0;
                    for i in 0..rows {
                        al += cp[i] * cp[i];
                        be += cq[i] * cq[i];
                        ga += cp[i] * cq[i];
                    }
                    (al, be, ga)
                };
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = a
        .iter()
        .enumerate()
        .map(|(i, col)| (col.iter().map(|x| x * x).sum::<f64>().sqrt(), i))
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut u = Mat::zeros(rows, n);
    let mut vm = Mat::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &(sigma, idx)) in order.iter().enumerate() {
        s.push(sigma);
        if sigma > 0.0 {
            for i in 0..rows {
                u[(i, k)] = a[idx][i] / sigma;
            }
        }
        for i in 0..n {
            vm[(i, k)] = v[idx][i];
        }
    }
    Svd { u, s, v: vm }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    svd(m).s
}

/// Operator norm (largest singular value); 0 for the zero matrix.
pub fn op_norm(m: &Mat) -> Result<f64> {
    m.check_finite()?;
    Ok(spectral_norm(m))
}

/// Operator norm without the finiteness check, for internal hot paths.
pub(crate) fn spectral_norm(m: &Mat) -> f64 {
    if m.rows == 0 || m.cols == 0 {
        return 0.0;
    }
    svd(m).s[0]
}

/// Largest singular value together with a unit left/right singular pair.
/// For the zero matrix the vectors are zero.
pub fn top_singular(m: &Mat) -> (f64, Vec<f64>, Vec<f64>) {
    let d = svd(m);
    (d.s[0], d.u.col(0), d.v.col(0))
}

pub fn nuclear_norm(m: &Mat) -> f64 {
    svd(m).s.iter().sum()
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi.
/// Returns eigenvalues ascending and the matching orthonormal eigenvectors as columns.
pub fn sym_eigen(m: &Mat) -> Result<(Vec<f64>, Mat)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    m.check_finite()?;
    let n = m.rows;
    let mut a = m.clone();
    // symmetrize exactly; the caller checked symmetry within its tolerance
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    let mut v = Mat::identity(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off == 0.0 || off.sqrt() <= 1e-300 {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0
                    || apq.abs() <= f64::EPSILON * 1e-2 * (a[(p, p)].abs() * a[(q, q)].abs()).sqrt()
                {
                    continue;
                }
                rotated = true;
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let vals = idx.iter().map(|&i| a[(i, i)]).collect();
    let mut vecs = Mat::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        for r in 0..n {
            vecs[(r, k)] = v[(r, i)];
        }
    }
    Ok((vals, vecs))
}

pub fn min_eigenvalue(m: &Mat) -> Result<f64> {
    Ok(sym_eigen(m)?.0[0])
}

/// Positivity on a real Hilbert space: selfadjoint (entrywise within `tol`)
/// and nonnegative quadratic form (smallest eigenvalue at least `-tol`).
/// Symmetry alone is checked first; a nonsymmetric matrix with a nonnegative
/// form is not positive.
pub fn is_real_positive(m: &Mat, tol: f64) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    m.check_finite()?;
    if !m.is_symmetric(tol) {
        return Ok(false);
    }
    Ok(min_eigenvalue(m)? >= -tol)
}

/// The block operator [[I_p, x], [x^T, I_q]].
pub fn contraction_block(x: &Mat) -> Mat {
    let xt = x.transpose();
    let ip = Mat::identity(x.rows);
    let iq = Mat::identity(x.cols);
    Mat::from_blocks(&[vec![&ip, x], vec![&xt, &iq]])
}

/// Returns (‖x‖ <= 1 + tol, [[I, x], [x^T, I]] is positive); the two agree for every x.
pub fn contraction_iff_positive(x: &Mat, tol: f64) -> Result<(bool, bool)> {
    let contractive = op_norm(x)? <= 1.0 + tol;
    let positive = is_real_positive(&contraction_block(x), tol)?;
    Ok((contractive, positive))
}

/// Minimum-norm least-squares solution of `a x = b` for each column of `b`,
/// with the Frobenius norm of the residual. Singular values below
/// `rcond * s_max` are treated as zero.
pub fn lstsq(a: &Mat, b: &Mat, rcond: f64) -> (Mat, f64) {
    assert_eq!(a.rows, b.rows, "lstsq row mismatch");
    let d = svd(a);
    let smax = d.s.first().copied().unwrap_or(0.0);
    let k = d.s.len();
    let mut x = Mat::zeros(a.cols, b.cols);
    for (i, &s) in d.s.iter().enumerate().take(k) {
        if s <= rcond * smax || s == 0.0 {
            continue;
        }
        for c in 0..b.cols {
            let coef: f64 = (0..a.rows).map(|r| d.u[(r, i)] * b[(r, c)]).sum::<f64>() / s;
            for r in 0..a.cols {
                x[(r, c)] += coef * d.v[(r, i)];
            }
        }
    }
    let resid = a.matmul(&x).sub(b).frobenius();
    (x, resid)
}

/// Numerical rank with an absolute threshold on singular values.
pub fn rank(m: &Mat, threshold: f64) -> usize {
    svd(m).s.iter().filter(|&&s| s > threshold).count()
}

/// Lower Cholesky factor of a symmetric positive definite matrix; `None` when
/// the matrix is not numerically positive definite.
pub fn cholesky(m: &Mat) -> Option<Mat> {
    let n = m.rows;
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Solves `l l^T x = b` given the lower Cholesky factor.
pub fn cholesky_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[(i, k)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            y[i] -= l[(k, i)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    y
}

/// Inverse of a symmetric positive definite matrix from its Cholesky factor.
pub fn cholesky_inverse(l: &Mat) -> Mat {
    let n = l.rows;
    let mut inv = Mat::zeros(n, n);
    let mut e = vec![0.0; n];
    for c in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[c] = 1.0;
        let col = cholesky_solve(l, &e);
        for r in 0..n {
            inv[(r, c)] = col[r];
        }
    }
    inv
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(m: &Mat) -> Mat {
    assert!(m.is_square());
    let n = m.rows;
    let norm1 = (0..n)
        .map(|c| (0..n).map(|r| m[(r, c)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let a = m.scale(1.0 / f64::from(2u32.pow(squarings)));
    let mut result = Mat::identity(n);
    let mut term = Mat::identity(n);
    for k in 1..=18 {
        term = term.matmul(&a).scale(1.0 / k as f64);
        result = result.add(&term);
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// Skew-symmetric part (m - m^T) / 2.
pub fn skew(m: &Mat) -> Mat {
    m.sub(&m.transpose()).scale(0.5)
}

/// Orthonormalizes columns by modified Gram-Schmidt, fixing signs so the
/// diagonal of the implied R factor is positive (Haar measure for Gaussian input).
pub fn gram_schmidt_columns(g: &Mat) -> Mat {
    let (rows, cols) = g.shape();
    let mut q: Vec<Vec<f64>> = (0..cols).map(|c| g.col(c)).collect();
    for j in 0..cols {
        for k in 0..j {
            let d: f64 = (0..rows).map(|i| q[k][i] * q[j][i]).sum();
            for i in 0..rows {
                q[j][i] -= d * q[k][i];
            }
        }
        let n: f64 = q[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in q[j].iter_mut() {
            *x /= n;
        }
    }
    let mut out = Mat::zeros(rows, cols);
    for (c, col) in q.iter().enumerate() {
        for r in 0..rows {
            out[(r, c)] = col[r];
        }
    }
    out
}

/// Real realization [[re, -im], [im, re]] of the complex matrix re + i im.
pub fn complex_realize(re: &Mat, im: &Mat) -> Mat {
    let nim = im.scale(-1.0);
    Mat::from_blocks(&[vec![re, &nim], vec![im, re]])
}

/// Block structure J = [[0, -I], [I, 0]] implementing multiplication by i.
pub fn complex_structure(n: usize) -> Mat {
    let z = Mat::zeros(n, n);
    let i = Mat::identity(n);
    let ni = i.scale(-1.0);
    Mat::from_blocks(&[vec![&z, &ni], vec![&i, &z]])
}
