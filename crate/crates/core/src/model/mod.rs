//! Domain types of the equivalent Kronecker model and the constructors that
//! produce correlation matrices from physical descriptions.

mod correlation;
pub mod matrix_io;
pub mod power;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::linalg::{self, CMat};

pub use correlation::{build_correlation, gauss_legendre, CorrelationQuadrature};

/// Antenna counts and the three noise/argument scalars.
///
/// `s_bar` is the argument of I₁, `s_under` the argument of I₂ and `z` the
/// receiver noise power. All powers are linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n: usize,
    pub l: usize,
    pub m: usize,
    pub s_bar: f64,
    pub s_under: f64,
    pub z: f64,
}

impl SystemParams {
    pub fn new(n: usize, l: usize, m: usize, s_bar: f64, s_under: f64, z: f64) -> Result<Self> {
        let p = Self { n, l, m, s_bar, s_under, z };
        p.validate()?;
        Ok(p)
    }

    /// Same noise power at the relay for both MI terms.
    pub fn symmetric(n: usize, l: usize, m: usize, s: f64, z: f64) -> Result<Self> {
        Self::new(n, l, m, s, s, z)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.l == 0 || self.m == 0 {
            return param(format!("dimensions must be positive, got ({}, {}, {})", self.n, self.l, self.m));
        }
        if !(self.z > 0.0) || !self.z.is_finite() {
            return param(format!("z must be positive and finite, got {}", self.z));
        }
        if !(self.s_bar >= 0.0) || !self.s_bar.is_finite() {
            return param(format!("s_bar must be nonnegative, got {}", self.s_bar));
        }
        if !(self.s_under >= 0.0) || !self.s_under.is_finite() {
            return param(format!("s_under must be nonnegative, got {}", self.s_under));
        }
        Ok(())
    }

    pub fn with_z(mut self, z: f64) -> Self {
        self.z = z;
        self
    }

    pub fn with_s(mut self, s_bar: f64, s_under: f64) -> Self {
        self.s_bar = s_bar;
        self.s_under = s_under;
        self
    }
}

/// A Hermitian positive semi-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPsd {
    entries: CMat,
}

/// Hermitian symmetry tolerance on entries.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Negative eigenvalues down to this fraction of λ_max are clamped to zero.
pub const PSD_CLAMP_REL: f64 = 1e-10;

impl HermitianPsd {
    /// Validates symmetry and semi-definiteness. Tiny negative eigenvalues
    /// (≥ −1e-10·λ_max) are clamped; anything more negative is rejected.
    pub fn new(m: CMat) -> Result<Self> {
        Ok(Self::with_clamped_mass(m)?.0)
    }

    /// Like [`HermitianPsd::new`], also returning the eigenvalue mass removed by clamping.
    pub fn with_clamped_mass(m: CMat) -> Result<(Self, f64)> {
        if !m.is_square() {
            return param(format!("matrix is {}x{}, expected square", m.nrows(), m.ncols()));
        }
        if m.nrows() == 0 {
            return param("matrix dimension must be positive");
        }
        if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return param("matrix has non-finite entries");
        }
        let defect = linalg::hermitian_defect(&m);
        if defect > HERMITIAN_TOL {
            return param(format!("matrix is not Hermitian (defect {defect:e})"));
        }
        let sym = linalg::hermitize(&m);
        if linalg::is_diagonal(&sym) {
            let d: Vec<f64> = (0..sym.nrows()).map(|i| sym[(i, i)].re).collect();
            let lmax = d.iter().cloned().fold(0.0, f64::max);
            let tol = PSD_CLAMP_REL * lmax;
            let mut removed = 0.0;
            let mut out = Vec::with_capacity(d.len());
            for v in d {
                if v < -tol || (lmax == 0.0 && v < 0.0) {
                    return param(format!("matrix has negative eigenvalue {v:e}"));
                }
                if v < 0.0 {
                    removed += -v;
                    out.push(0.0);
                } else {
                    out.push(v);
                }
            }
            return Ok((Self { entries: linalg::real_diag(&out) }, removed));
        }
        let (vals, vecs) = linalg::herm_eig(&sym);
        let lmax = vals.last().copied().unwrap_or(0.0).max(0.0);
        let tol = PSD_CLAMP_REL * lmax;
        let lmin = vals[0];
        if lmin < -tol {
            return param(format!("matrix has negative eigenvalue {lmin:e} (λ_max {lmax:e})"));
        }
        if lmin >= 0.0 {
            return Ok((Self { entries: sym }, 0.0));
        }
        let removed: f64 = vals.iter().filter(|v| **v < 0.0).map(|v| -v).sum();
        let repaired = linalg::herm_from_eig(&vals, &vecs, |v| v.max(0.0));
        Ok((Self { entries: repaired }, removed))
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: linalg::eye(n) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { entries: CMat::zeros(n, n) }
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(linalg::real_diag(values))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0) {
            return param("PSD scale factor must be nonnegative");
        }
        Ok(Self { entries: &self.entries * linalg::c(factor) })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.entries
    }

    pub fn into_matrix(self) -> CMat {
        self.entries
    }

    pub fn is_identity(&self) -> bool {
        linalg::is_identity(&self.entries)
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.entries).re
    }

    /// Largest eigenvalue.
    pub fn norm(&self) -> f64 {
        linalg::psd_norm(&self.entries)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::herm_eigenvalues(&self.entries)
            .into_iter()
            .map(|v| v.max(0.0))
            .collect()
    }

    pub fn sqrt(&self) -> CMat {
        if linalg::is_diagonal(&self.entries) {
            let d: Vec<f64> = (0..self.dim()).map(|i| self.entries[(i, i)].re.max(0.0).sqrt()).collect();
            return linalg::real_diag(&d);
        }
        let (vals, vecs) = linalg::herm_eig(&self.entries);
        linalg::herm_from_eig(&vals, &vecs, |v| v.max(0.0).sqrt())
    }
}

/// Matrix square root of a Hermitian PSD matrix via eigendecomposition,
/// negative eigenvalues clamped at zero.
pub fn psd_sqrt(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return param("psd_sqrt needs a square matrix");
    }
    let defect = linalg::hermitian_defect(m);
    let scale = m.iter().map(|v| v.norm()).fold(1.0, f64::max);
    if defect > HERMITIAN_TOL * scale {
        return param(format!("psd_sqrt input is not Hermitian (defect {defect:e})"));
    }
    let (vals, vecs) = linalg::herm_eig(m);
    Ok(linalg::herm_from_eig(&vals, &vecs, |v| v.max(0.0).sqrt()))
}

/// The four correlation matrices R₁ (N×N), T₁ (L×L), R₂ (L×L), T₂ (M×M).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSet {
    pub r1: HermitianPsd,
    pub t1: HermitianPsd,
    pub r2: HermitianPsd,
    pub t2: HermitianPsd,
}

impl CorrelationSet {
    pub fn new(r1: HermitianPsd, t1: HermitianPsd, r2: HermitianPsd, t2: HermitianPsd) -> Result<Self> {
        if t1.dim() != r2.dim() {
            return param(format!("T1 is {0}x{0} but R2 is {1}x{1}", t1.dim(), r2.dim()));
        }
        Ok(Self { r1, t1, r2, t2 })
    }

    pub fn identity(n: usize, l: usize, m: usize) -> Self {
        Self {
            r1: HermitianPsd::identity(n),
            t1: HermitianPsd::identity(l),
            r2: HermitianPsd::identity(l),
            t2: HermitianPsd::identity(m),
        }
    }

    pub fn n(&self) -> usize {
        self.r1.dim()
    }

    pub fn l(&self) -> usize {
        self.t1.dim()
    }

    pub fn m(&self) -> usize {
        self.t2.dim()
    }

    pub fn is_identity(&self) -> bool {
        self.r1.is_identity() && self.t1.is_identity() && self.r2.is_identity() && self.t2.is_identity()
    }

    pub fn check_dims(&self, p: &SystemParams) -> Result<()> {
        if (self.n(), self.l(), self.m()) != (p.n, p.l, p.m) {
            return param(format!(
                "correlation dimensions ({}, {}, {}) do not match parameters ({}, {}, {})",
                self.n(),
                self.l(),
                self.m(),
                p.n,
                p.l,
                p.m
            ));
        }
        Ok(())
    }

    /// The five normalized traces of the trace-positivity assumption:
    /// (1/L)Tr(R₂T₁), (1/N)Tr R₁, (1/L)Tr R₂, (1/L)Tr T₁, (1/M)Tr T₂.
    pub fn normalized_traces(&self) -> [f64; 5] {
        let l = self.l() as f64;
        [
            linalg::trace_prod(self.r2.matrix(), self.t1.matrix()).re / l,
            self.r1.trace() / self.n() as f64,
            self.r2.trace() / l,
            self.t1.trace() / l,
            self.t2.trace() / self.m() as f64,
        ]
    }

    /// Spectral norms of R₁, T₁, R₂, T₂.
    pub fn norms(&self) -> [f64; 4] {
        [self.r1.norm(), self.t1.norm(), self.r2.norm(), self.t2.norm()]
    }

    /// Rejects sets whose normalized traces are not all strictly positive.
    pub fn check_traces(&self) -> Result<()> {
        let names = ["(1/L)Tr(R2 T1)", "(1/N)Tr R1", "(1/L)Tr R2", "(1/L)Tr T1", "(1/M)Tr T2"];
        for (name, v) in names.iter().zip(self.normalized_traces()) {
            if !(v > 0.0) {
                return Err(Error::Parameter(format!("{name} = {v:e} is not strictly positive")));
            }
        }
        Ok(())
    }
}

/// Physical description: G₁ = A₁X₁B₁, G₂ = A₂X₂B₂, relay matrix Φ and
/// transmit covariance P.
#[derive(Debug, Clone, PartialEq)]
pub struct RawChannelSpec {
    pub a1: CMat,
    pub b1: CMat,
    pub a2: CMat,
    pub b2: CMat,
    pub phi: CMat,
    pub p: CMat,
}

impl RawChannelSpec {
    pub fn identity(n: usize, l: usize, m: usize) -> Self {
        Self {
            a1: linalg::eye(n),
            b1: linalg::eye(l),
            a2: linalg::eye(l),
            b2: linalg::eye(m),
            phi: linalg::eye(l),
            p: linalg::eye(m),
        }
    }
}

fn square(name: &str, m: &CMat, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return param(format!("{name} is {}x{}, expected {dim}x{dim}", m.nrows(), m.ncols()));
    }
    Ok(())
}

/// Left Gram factor U Σ² Uᴴ from the SVD of `a`.
fn left_gram(a: &CMat) -> CMat {
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let s2: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
    let mut us = u.clone();
    for (j, s) in s2.iter().enumerate() {
        for i in 0..us.nrows() {
            us[(i, j)] *= linalg::c(*s);
        }
    }
    &us * u.adjoint()
}

/// Right Gram factor V Σ² Vᴴ from the SVD of `b`.
fn right_gram(b: &CMat) -> CMat {
    let svd = b.clone().svd(false, true);
    let v = svd.v_t.expect("requested Vᴴ").adjoint();
    let s2: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
    let mut vs = v.clone();
    for (j, s) in s2.iter().enumerate() {
        for i in 0..vs.nrows() {
            vs[(i, j)] *= linalg::c(*s);
        }
    }
    &vs * v.adjoint()
}

/// Reduces (A₁, B₁, A₂, B₂, Φ, P) to the equivalent correlation matrices:
/// Rᵢ from the left singular structure of Aᵢ, T₁ from the right singular
/// structure of B₁Φ and T₂ from that of B₂P^{1/2}.
pub fn reduce_raw_spec(raw: &RawChannelSpec) -> Result<CorrelationSet> {
    let n = raw.a1.nrows();
    let l = raw.b1.nrows();
    let m = raw.b2.nrows();
    square("A1", &raw.a1, n)?;
    square("B1", &raw.b1, l)?;
    square("A2", &raw.a2, l)?;
    square("B2", &raw.b2, m)?;
    square("Phi", &raw.phi, l)?;
    square("P", &raw.p, m)?;
    let p_half = HermitianPsd::new(raw.p.clone())
        .map_err(|e| Error::Parameter(format!("P: {e}")))?
        .sqrt();
    let herm = |x: CMat| HermitianPsd::new(linalg::hermitize(&x));
    let r1 = herm(left_gram(&raw.a1))?;
    let r2 = herm(left_gram(&raw.a2))?;
    let t1 = herm(right_gram(&(&raw.b1 * &raw.phi)))?;
    let t2 = herm(right_gram(&(&raw.b2 * &p_half)))?;
    CorrelationSet::new(r1, t1, r2, t2)
}

/// Values of the model assumptions; reported, not judged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// N/L and L/M.
    pub ratio_n_l: f64,
    pub ratio_l_m: f64,
    /// (1/L)Tr(R₂T₁), (1/N)Tr R₁, (1/L)Tr R₂, (1/L)Tr T₁, (1/M)Tr T₂.
    pub normalized_traces: [f64; 5],
    /// ‖R₁‖, ‖T₁‖, ‖R₂‖, ‖T₂‖.
    pub norms: [f64; 4],
}

impl AssumptionReport {
    pub fn min_trace(&self) -> f64 {
        self.normalized_traces.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_norm(&self) -> f64 {
        self.norms.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn assumption_report(corr: &CorrelationSet, p: &SystemParams) -> AssumptionReport {
    AssumptionReport {
        ratio_n_l: p.n as f64 / p.l as f64,
        ratio_l_m: p.l as f64 / p.m as f64,
        normalized_traces: corr.normalized_traces(),
        norms: corr.norms(),
    }
}

#[cfg(test)]
mod tests;
