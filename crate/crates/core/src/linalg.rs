//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{numerical, Result};

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn real_diag(values: &[f64]) -> CMat {
    let n = values.len();
    CMat::from_fn(n, n, |i, j| if i == j { c(values[i]) } else { ZERO })
}

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// (M + Mᴴ)/2.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5)
}

pub fn is_identity(m: &CMat) -> bool {
    m.is_square()
        && m.iter()
            .enumerate()
            .all(|(k, v)| {
                let (i, j) = (k % m.nrows(), k / m.nrows());
                *v == if i == j { ONE } else { ZERO }
            })
}

pub fn is_diagonal(m: &CMat) -> bool {
    let n = m.nrows();
    (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)] == ZERO))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn herm_eigenvalues(m: &CMat) -> Vec<f64> {
    if is_diagonal(m) {
        let mut d: Vec<f64> = (0..m.nrows()).map(|i| m[(i, i)].re).collect();
        d.sort_by(f64::total_cmp);
        return d;
    }
    herm_eig(m).0
}

/// V diag(f(λ)) Vᴴ.
pub fn herm_from_eig(values: &[f64], vectors: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let n = values.len();
    let mut scaled = vectors.clone();
    for j in 0..n {
        let s = c(f(values[j]));
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    &scaled * vectors.adjoint()
}

/// Spectral norm of a Hermitian PSD matrix (its largest eigenvalue).
pub fn psd_norm(m: &CMat) -> f64 {
    herm_eigenvalues(m).last().copied().unwrap_or(0.0).max(0.0)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Tr(AB) without forming the product.
pub fn trace_prod(a: &CMat, b: &CMat) -> Complex64 {
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Operand form for [`gemm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    /// The matrix as stored.
    N,
    /// Its conjugate transpose.
    H,
}

/// `op(a) · op(b)` through a blocked SIMD kernel; nalgebra's generic complex
/// product is several times slower at the sizes the Monte Carlo loop uses.
pub fn gemm(a: &CMat, ta: Op, b: &CMat, tb: Op) -> CMat {
    let (m, k) = match ta {
        Op::N => (a.nrows(), a.ncols()),
        Op::H => (a.ncols(), a.nrows()),
    };
    let (kb, n) = match tb {
        Op::N => (b.nrows(), b.ncols()),
        Op::H => (b.ncols(), b.nrows()),
    };
    assert_eq!(k, kb, "gemm inner dimensions differ");
    let mut out = CMat::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return out;
    }
    // Column-major storage: element (i, j) sits at i + j·nrows.
    let strides = |x: &CMat, t: Op| match t {
        Op::N => (1isize, x.nrows() as isize),
        Op::H => (x.nrows() as isize, 1isize),
    };
    // The kernel has no conjugation flag: conjugate a copy and transpose through strides.
    let conj = |x: &CMat, t: Op| (t == Op::H).then(|| x.map(|v| v.conj()));
    let (ca, cb) = (conj(a, ta), conj(b, tb));
    let (a, b) = (ca.as_ref().unwrap_or(a), cb.as_ref().unwrap_or(b));
    let (rsa, csa) = strides(a, ta);
    let (rsb, csb) = strides(b, tb);
    // SAFETY: Complex64 is repr(C) {re, im}, layout-identical to [f64; 2]; the
    // shapes and strides above describe exactly the owned buffers, and `out`
    // does not alias either input.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            rsa,
            csa,
            b.as_ptr() as *const [f64; 2],
            rsb,
            csb,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    out
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// log det of a Hermitian positive-definite matrix.
///
/// Cholesky first; on failure the argument is symmetrized and retried, then an
/// unpivoted LDLᴴ is attempted before giving up.
pub fn logdet_hpd(m: &CMat) -> Result<f64> {
    if let Some(v) = chol_logdet(m.clone()) {
        return Ok(v);
    }
    let sym = hermitize(m);
    if let Some(v) = chol_logdet(sym.clone()) {
        return Ok(v);
    }
    match ldl_logdet(&sym) {
        Some(v) => Ok(v),
        None => numerical("log-determinant argument is not positive definite"),
    }
}

fn chol_logdet(m: CMat) -> Option<f64> {
    let chol = Cholesky::new(m)?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..l.nrows() {
        // Complex sqrt of a negative pivot comes back as (≈0, ±√|p|).
        let d = l[(i, i)].re;
        if !(d > 0.0) || !d.is_finite() || l[(i, i)].im.abs() > 1e-8 * d {
            return None;
        }
        acc += d.ln();
    }
    Some(2.0 * acc)
}

fn ldl_logdet(m: &CMat) -> Option<f64> {
    let n = m.nrows();
    let mut l = CMat::identity(n, n);
    let mut d = vec![0.0f64; n];
    for j in 0..n {
        let mut dj = m[(j, j)].re;
        for k in 0..j {
            dj -= l[(j, k)].norm_sqr() * d[k];
        }
        if !(dj > 0.0) || !dj.is_finite() {
            return None;
        }
        d[j] = dj;
        for i in (j + 1)..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj() * d[k];
            }
            l[(i, j)] = v / dj;
        }
    }
    Some(d.iter().map(|v| v.ln()).sum())
}

/// Solve A X = B for a Hermitian positive-definite A.
pub fn solve_hpd(a: CMat, b: &CMat) -> Result<CMat> {
    match Cholesky::new(a.clone()) {
        Some(ch) if chol_pivots_ok(&ch) => Ok(ch.solve(b)),
        _ => solve_general(a, b),
    }
}

fn chol_pivots_ok(ch: &Cholesky<Complex64, nalgebra::Dyn>) -> bool {
    let l = ch.l_dirty();
    (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-8 * d.re
    })
}

pub fn solve_general(a: CMat, b: &CMat) -> Result<CMat> {
    let lu = a.lu();
    match lu.solve(b) {
        Some(x) => Ok(x),
        None => numerical("singular matrix in linear solve"),
    }
}

pub fn inverse(a: CMat) -> Result<CMat> {
    let n = a.nrows();
    solve_general(a, &eye(n))
}

pub fn inverse_hpd(a: CMat) -> Result<CMat> {
    let n = a.nrows();
    solve_hpd(a, &eye(n))
}

/// A square matrix kept diagonal for as long as the operations allow, so that
/// identity-like correlation structures cost O(n) instead of O(n³).
#[derive(Debug, Clone, PartialEq)]
pub enum Mat {
    Diag(Vec<Complex64>),
    Full(CMat),
}

impl Mat {
    pub fn from_dense(m: &CMat) -> Self {
        if is_diagonal(m) {
            Mat::Diag(m.diagonal().iter().copied().collect())
        } else {
            Mat::Full(m.clone())
        }
    }

    pub fn identity(n: usize) -> Self {
        Mat::Diag(vec![ONE; n])
    }

    pub fn dim(&self) -> usize {
        match self {
            Mat::Diag(d) => d.len(),
            Mat::Full(m) => m.nrows(),
        }
    }

    pub fn dense(&self) -> CMat {
        match self {
            Mat::Diag(d) => CMat::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { ZERO }),
            Mat::Full(m) => m.clone(),
        }
    }

    pub fn is_diag(&self) -> bool {
        matches!(self, Mat::Diag(_))
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        match (self, other) {
            (Mat::Diag(a), Mat::Diag(b)) => Mat::Diag(a.iter().zip(b).map(|(x, y)| x * y).collect()),
            (Mat::Diag(a), Mat::Full(b)) => Mat::Full(CMat::from_fn(b.nrows(), b.ncols(), |i, j| a[i] * b[(i, j)])),
            (Mat::Full(a), Mat::Diag(b)) => Mat::Full(CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * b[j])),
            (Mat::Full(a), Mat::Full(b)) => Mat::Full(a * b),
        }
    }

    pub fn scale(&self, s: Complex64) -> Mat {
        match self {
            Mat::Diag(d) => Mat::Diag(d.iter().map(|v| v * s).collect()),
            Mat::Full(m) => Mat::Full(m * s),
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        match (self, other) {
            (Mat::Diag(a), Mat::Diag(b)) => Mat::Diag(a.iter().zip(b).map(|(x, y)| x + y).collect()),
            _ => Mat::Full(self.dense() + other.dense()),
        }
    }

    /// self + s·I.
    pub fn shift(&self, s: Complex64) -> Mat {
        match self {
            Mat::Diag(d) => Mat::Diag(d.iter().map(|v| v + s).collect()),
            Mat::Full(m) => {
                let mut m = m.clone();
                for i in 0..m.nrows() {
                    m[(i, i)] += s;
                }
                Mat::Full(m)
            }
        }
    }

    pub fn trace(&self) -> Complex64 {
        match self {
            Mat::Diag(d) => d.iter().sum(),
            Mat::Full(m) => trace(m),
        }
    }

    /// Tr(self · other) without forming the product.
    pub fn trace_mul(&self, other: &Mat) -> Complex64 {
        match (self, other) {
            (Mat::Diag(a), Mat::Diag(b)) => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            (Mat::Diag(a), Mat::Full(b)) | (Mat::Full(b), Mat::Diag(a)) => {
                a.iter().enumerate().map(|(i, x)| x * b[(i, i)]).sum()
            }
            (Mat::Full(a), Mat::Full(b)) => trace_prod(a, b),
        }
    }

    /// Inverse; `hermitian` selects Cholesky over LU for dense inputs.
    pub fn inverse(&self, hermitian: bool) -> Result<Mat> {
        match self {
            Mat::Diag(d) => {
                if d.iter().any(|v| v.norm() == 0.0) {
                    return numerical("singular diagonal matrix");
                }
                Ok(Mat::Diag(d.iter().map(|v| ONE / v).collect()))
            }
            Mat::Full(m) => Ok(Mat::Full(if hermitian { inverse_hpd(m.clone())? } else { inverse(m.clone())? })),
        }
    }

    /// log det of a Hermitian positive-definite matrix.
    pub fn logdet_hpd(&self) -> Result<f64> {
        match self {
            Mat::Diag(d) => {
                if d.iter().any(|v| !(v.re > 0.0)) {
                    return numerical("log-determinant argument is not positive definite");
                }
                Ok(d.iter().map(|v| v.re.ln()).sum())
            }
            Mat::Full(m) => logdet_hpd(m),
        }
    }

    /// log det(I + self) for Hermitian PSD `self`, accurate when self is small.
    pub fn logdet_identity_plus(&self) -> Result<f64> {
        match self {
            Mat::Diag(d) => {
                if d.iter().any(|v| !(v.re > -1.0)) {
                    return numerical("log-determinant argument is not positive definite");
                }
                Ok(d.iter().map(|v| v.re.ln_1p()).sum())
            }
            Mat::Full(_) => self.shift(ONE).logdet_hpd(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gemm_matches_naive_product() {
        let a = CMat::from_fn(5, 3, |i, j| Complex64::new(i as f64 - 0.3 * j as f64, (i * j) as f64 * 0.1 + 0.2));
        let b = CMat::from_fn(3, 4, |i, j| Complex64::new(0.5 * j as f64 + 1.0, i as f64 - 2.0));
        let close = |x: &CMat, y: &CMat| (x - y).iter().all(|v| v.norm() < 1e-12);
        assert!(close(&gemm(&a, Op::N, &b, Op::N), &(&a * &b)));
        assert!(close(&gemm(&a, Op::N, &a, Op::H), &(&a * a.adjoint())));
        assert!(close(&gemm(&a, Op::H, &a, Op::N), &(a.adjoint() * &a)));
        assert!(close(&gemm(&b, Op::H, &a, Op::H), &(b.adjoint() * a.adjoint())));
        assert_eq!(gemm(&CMat::zeros(2, 0), Op::N, &CMat::zeros(0, 3), Op::N), CMat::zeros(2, 3));
    }

    #[test]
    fn logdet_matches_eigenvalues() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[c(2.0), Complex64::new(0.5, 0.5), Complex64::new(0.5, -0.5), c(3.0)],
        );
        let (vals, _) = herm_eig(&m);
        let expect: f64 = vals.iter().map(|v| v.ln()).sum();
        assert!((logdet_hpd(&m).unwrap() - expect).abs() < 1e-13);
        assert!((ldl_logdet(&m).unwrap() - expect).abs() < 1e-13);
    }

    #[test]
    fn logdet_rejects_indefinite() {
        let m = real_diag(&[1.0, -1.0]);
        assert!(logdet_hpd(&m).is_err());
    }

    #[test]
    fn mat_diag_and_full_agree() {
        let a = Mat::Diag(vec![c(2.0), Complex64::new(1.0, 1.0)]);
        let b = Mat::Full(CMat::from_fn(2, 2, |i, j| Complex64::new(i as f64 + 1.0, j as f64)));
        let ad = Mat::Full(a.dense());
        for (x, y) in [(&a, &b), (&b, &a), (&a, &a)] {
            let want = x.dense() * y.dense();
            assert!((x.mul(y).dense() - &want).iter().all(|v| v.norm() < 1e-14));
            assert!((x.trace_mul(y) - trace(&want)).norm() < 1e-14);
        }
        assert!((ad.inverse(false).unwrap().dense() - a.inverse(false).unwrap().dense()).iter().all(|v| v.norm() < 1e-14));
        let h = Mat::Diag(vec![c(0.5), c(1e-12)]);
        assert!((h.logdet_identity_plus().unwrap() - (1.5f64.ln() + 1e-12)).abs() < 1e-20);
        assert!((Mat::Full(h.dense()).logdet_identity_plus().unwrap() - 1.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn trace_prod_matches_product() {
        let a = CMat::from_fn(3, 3, |i, j| Complex64::new(i as f64 + 1.0, j as f64 - 0.5));
        let b = CMat::from_fn(3, 3, |i, j| Complex64::new((i * j) as f64, 1.0));
        assert!((trace_prod(&a, &b) - trace(&(&a * &b))).norm() < 1e-12);
    }
}
