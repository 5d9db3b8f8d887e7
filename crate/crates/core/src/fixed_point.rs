//! Solvers for the two fundamental fixed-point systems, their complex-argument
//! extension and the i.i.d. scalar roots.
//!
//! System 1, in the unknowns (δ, ω̄, ω̲, γ):
//!
//! ```text
//! δ = (1/L) Tr R₁ (z I + (s̄ω̄ + γω̲) R₁)⁻¹
//! ω̄ = (1/L) Tr T₁ F_ω          F_ω = (I + s̄δT₁ + δγ R₂T₁)⁻¹
//! ω̲ = (1/L) Tr R₂T₁ F_ω
//! γ = (1/M) Tr T₂ (I + (L/M) δω̲ T₂)⁻¹
//! ```
//!
//! System 2, in (τ, τ̄):
//!
//! ```text
//! τ = (1/L) Tr R₁ (z I + s̲τ̄ R₁)⁻¹
//! τ̄ = (1/L) Tr T₁ (I + s̲τ T₁)⁻¹
//! ```

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::linalg::{self, CMat};
use crate::model::{CorrelationSet, HermitianPsd, SystemParams};

/// Scalars the trace kernel can run on: real for z > 0, complex for spectra.
pub trait Field:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whether I + δ(s̄T₁ + γK) is Hermitian for this scalar type.
    const HERMITIAN: bool;
    fn of(x: f64) -> Self;
    fn to_c(self) -> Complex64;
    fn from_c(v: Complex64) -> Self;
    fn modulus(self) -> f64;
}

impl Field for f64 {
    const HERMITIAN: bool = true;
    fn of(x: f64) -> Self {
        x
    }
    fn to_c(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_c(v: Complex64) -> Self {
        v.re
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Field for Complex64 {
    const HERMITIAN: bool = false;
    fn of(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn to_c(self) -> Complex64 {
        self
    }
    fn from_c(v: Complex64) -> Self {
        v
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Eigenvalues with multiplicities, so identity-like inputs cost O(1).
#[derive(Debug, Clone, PartialEq)]
struct Weighted(Vec<(f64, f64)>);

impl Weighted {
    fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        let mut out: Vec<(f64, f64)> = Vec::new();
        for v in values {
            match out.last_mut() {
                Some((last, count)) if *last == v => *count += 1.0,
                _ => out.push((v, 1.0)),
            }
        }
        Self(out)
    }

    /// Σ count / (a + bλ).
    fn inverse_sum<T: Field>(&self, a: T, b: T) -> T {
        self.0.iter().fold(T::of(0.0), |acc, &(v, k)| acc + T::of(k) / (a + b * T::of(v)))
    }

    /// Σ count·λ / (a + bλ).
    fn resolvent_sum<T: Field>(&self, a: T, b: T) -> T {
        self.0.iter().fold(T::of(0.0), |acc, &(v, k)| acc + T::of(k * v) / (a + b * T::of(v)))
    }
}

/// How the L-level traces Tr T₁(I + aT₁ + bK)⁻¹ and Tr K(I + aT₁ + bK)⁻¹ are
/// evaluated, with K = T₁^{1/2} R₂ T₁^{1/2}.
#[derive(Debug, Clone, PartialEq)]
enum PairTraces {
    /// T₁ and K share an eigenbasis: (t, k, multiplicity).
    Joint(Vec<(f64, f64, f64)>),
    Dense { t1: CMat, k: CMat },
}

fn scalar_multiple_of_identity(m: &HermitianPsd) -> Option<f64> {
    let mat = m.matrix();
    if !linalg::is_diagonal(mat) {
        return None;
    }
    let d0 = mat[(0, 0)];
    (0..m.dim()).all(|i| mat[(i, i)] == d0).then_some(d0.re)
}

fn diagonal_of(m: &HermitianPsd) -> Option<Vec<f64>> {
    let mat = m.matrix();
    linalg::is_diagonal(mat).then(|| (0..m.dim()).map(|i| mat[(i, i)].re.max(0.0)).collect())
}

fn group_pairs(mut pairs: Vec<(f64, f64)>) -> Vec<(f64, f64, f64)> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    for (t, k) in pairs {
        match out.last_mut() {
            Some((lt, lk, c)) if *lt == t && *lk == k => *c += 1.0,
            _ => out.push((t, k, 1.0)),
        }
    }
    out
}

impl PairTraces {
    fn new(t1: &HermitianPsd, r2: &HermitianPsd) -> Self {
        if let (Some(t), Some(r)) = (diagonal_of(t1), diagonal_of(r2)) {
            return Self::Joint(group_pairs(t.iter().zip(&r).map(|(t, r)| (*t, t * r)).collect()));
        }
        if let Some(c) = scalar_multiple_of_identity(t1) {
            return Self::Joint(group_pairs(r2.eigenvalues().into_iter().map(|r| (c, c * r)).collect()));
        }
        if let Some(c) = scalar_multiple_of_identity(r2) {
            return Self::Joint(group_pairs(t1.eigenvalues().into_iter().map(|t| (t, c * t)).collect()));
        }
        let half = t1.sqrt();
        let k = linalg::hermitize(&(&half * r2.matrix() * &half));
        Self::Dense { t1: t1.matrix().clone(), k }
    }

    /// ((1/L)Tr T₁G, (1/L)Tr KG) with G = (I + aT₁ + bK)⁻¹.
    fn traces<T: Field>(&self, a: T, b: T, l: f64) -> Result<(T, T)> {
        match self {
            Self::Joint(pairs) => {
                let mut wb = T::of(0.0);
                let mut wu = T::of(0.0);
                for &(t, k, c) in pairs {
                    let g = T::of(c) / (T::of(1.0) + a * T::of(t) + b * T::of(k));
                    wb = wb + T::of(t) * g;
                    wu = wu + T::of(k) * g;
                }
                Ok((wb / T::of(l), wu / T::of(l)))
            }
            Self::Dense { t1, k } => {
                let n = t1.nrows();
                let (ac, bc) = (a.to_c(), b.to_c());
                let mut m = t1 * ac + k * bc;
                for i in 0..n {
                    m[(i, i)] += linalg::ONE;
                }
                let g = if T::HERMITIAN { linalg::inverse_hpd(m)? } else { linalg::inverse(m)? };
                let wb = linalg::trace_prod(t1, &g) / l;
                let wu = linalg::trace_prod(k, &g) / l;
                Ok((T::from_c(wb), T::from_c(wu)))
            }
        }
    }
}

/// Precomputed spectral data of a correlation set, reusable across many
/// solves with different (s̄, z).
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    n: usize,
    l: usize,
    m: usize,
    r1: Weighted,
    t1: Weighted,
    t2: Weighted,
    pair: PairTraces,
    /// (1/L)Tr R₁, (1/L)Tr T₁, (1/L)Tr R₂T₁, (1/M)Tr T₂.
    traces: [f64; 4],
}

/// The right-hand sides of system 1 at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rhs1<T> {
    pub delta: T,
    pub omega_bar: T,
    pub omega_under: T,
    pub gamma: T,
}

impl Kernel {
    pub fn new(corr: &CorrelationSet) -> Self {
        let l = corr.l() as f64;
        let nt = corr.normalized_traces();
        Self {
            n: corr.n(),
            l: corr.l(),
            m: corr.m(),
            r1: Weighted::new(corr.r1.eigenvalues()),
            t1: Weighted::new(corr.t1.eigenvalues()),
            t2: Weighted::new(corr.t2.eigenvalues()),
            pair: PairTraces::new(&corr.t1, &corr.r2),
            traces: [corr.r1.trace() / l, nt[3], nt[0], nt[4]],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n, self.l, self.m)
    }

    fn lf(&self) -> f64 {
        self.l as f64
    }

    fn ratio_lm(&self) -> f64 {
        self.l as f64 / self.m as f64
    }

    pub fn delta<T: Field>(&self, z: T, s_bar: f64, omega_bar: T, omega_under: T, gamma: T) -> T {
        let e = T::of(s_bar) * omega_bar + gamma * omega_under;
        self.r1.resolvent_sum(z, e) / T::of(self.lf())
    }

    pub fn omegas<T: Field>(&self, s_bar: f64, delta: T, gamma: T) -> Result<(T, T)> {
        self.pair.traces(delta * T::of(s_bar), delta * gamma, self.lf())
    }

    pub fn gamma<T: Field>(&self, delta: T, omega_under: T) -> T {
        let b = T::of(self.ratio_lm()) * delta * omega_under;
        self.t2.resolvent_sum(T::of(1.0), b) / T::of(self.m as f64)
    }

    pub fn rhs1<T: Field>(&self, z: T, s_bar: f64, x: [T; 4]) -> Result<Rhs1<T>> {
        let [d, wb, wu, g] = x;
        let (wb_new, wu_new) = self.omegas(s_bar, d, g)?;
        Ok(Rhs1 {
            delta: self.delta(z, s_bar, wb, wu, g),
            omega_bar: wb_new,
            omega_under: wu_new,
            gamma: self.gamma(d, wu),
        })
    }

    pub fn tau<T: Field>(&self, z: T, s_under: f64, tau_bar: T) -> T {
        self.r1.resolvent_sum(z, T::of(s_under) * tau_bar) / T::of(self.lf())
    }

    pub fn tau_bar<T: Field>(&self, s_under: f64, tau: T) -> T {
        self.t1.resolvent_sum(T::of(1.0), T::of(s_under) * tau) / T::of(self.lf())
    }

    /// (1/N)Tr(zI + eR₁)⁻¹.
    pub fn r1_normalized_resolvent<T: Field>(&self, z: T, e: T) -> T {
        self.r1.inverse_sum(z, e) / T::of(self.n as f64)
    }

    /// (1/N)Tr F_δ(s̄, −ζ): the Stieltjes transform of the deterministic
    /// equivalent of B = H₁H₂H₂ᴴH₁ᴴ + s̄H₁H₁ᴴ.
    pub fn stieltjes1(&self, s_bar: f64, sol: &ComplexSolutionS1) -> Complex64 {
        let e = Complex64::from(s_bar) * sol.omega_bar + sol.gamma * sol.omega_under;
        self.r1_normalized_resolvent(-sol.zeta, e)
    }

    /// Leading-order large-|z| values, used to start the complex iteration.
    fn tail_guess(&self, z: Complex64) -> [Complex64; 4] {
        let [r1, t1, r2t1, t2] = self.traces;
        [Complex64::new(r1, 0.0) / z, t1.into(), r2t1.into(), t2.into()]
    }
}

/// Iteration controls for system 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Relaxation α in x ← (1−α)x + αT(x).
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_outer: 10_000, max_inner: 200, damping: 1.0 }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_outer == 0 || self.max_inner == 0 {
            return param("solver needs tol > 0 and positive iteration limits");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return param(format!("damping must lie in (0, 1], got {}", self.damping));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionS1 {
    pub delta: f64,
    pub omega_bar: f64,
    pub omega_under: f64,
    pub gamma: f64,
    /// Largest equation mismatch, each relative to max(1, |lhs|).
    pub residual: f64,
    pub iterations: usize,
    pub inner_iterations: usize,
}

impl SolutionS1 {
    pub fn as_array(&self) -> [f64; 4] {
        [self.delta, self.omega_bar, self.omega_under, self.gamma]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionS2 {
    pub tau: f64,
    pub tau_bar: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexSolutionS1 {
    pub delta: Complex64,
    pub omega_bar: Complex64,
    pub omega_under: Complex64,
    pub gamma: Complex64,
    pub zeta: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

impl ComplexSolutionS1 {
    fn as_array(&self) -> [Complex64; 4] {
        [self.delta, self.omega_bar, self.omega_under, self.gamma]
    }
}

fn scaled_gap<T: Field>(new: T, old: T) -> f64 {
    (new - old).modulus() / new.modulus().max(1.0)
}

fn relax<T: Field>(old: T, new: T, alpha: f64) -> T {
    if alpha == 1.0 {
        new
    } else {
        T::of(1.0 - alpha) * old + T::of(alpha) * new
    }
}

fn check_inputs(corr: &CorrelationSet, p: &SystemParams) -> Result<()> {
    p.validate()?;
    corr.check_dims(p)?;
    corr.check_traces()
}

/// System 1 by the nested iteration: an inner loop updates (ω̲, γ) at fixed δ,
/// then the outer loop refreshes ω̄ and δ. Starts from δ = 1/z, ω̄ = ω̲ = γ = 1.
pub fn solve_system1(corr: &CorrelationSet, p: &SystemParams, opts: &SolverOptions) -> Result<SolutionS1> {
    check_inputs(corr, p)?;
    Kernel::new(corr).solve_system1(p.s_bar, p.z, opts)
}

impl Kernel {
    pub fn solve_system1(&self, s_bar: f64, z: f64, opts: &SolverOptions) -> Result<SolutionS1> {
        self.solve_system1_from(s_bar, z, [1.0 / z, 1.0, 1.0, 1.0], opts)
    }

    /// Same iteration from an arbitrary positive starting point.
    pub fn solve_system1_from(&self, s_bar: f64, z: f64, init: [f64; 4], opts: &SolverOptions) -> Result<SolutionS1> {
        opts.validate()?;
        if !(z > 0.0) || !(s_bar >= 0.0) {
            return param("system 1 needs z > 0 and s_bar >= 0");
        }
        if init.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return param("system 1 starting point must be positive");
        }
        let a = opts.damping;
        let [mut d, mut wb, mut wu, mut g] = init;
        let mut inner_total = 0;
        let mut residual = f64::INFINITY;
        for outer in 1..=opts.max_outer {
            for _ in 0..opts.max_inner {
                inner_total += 1;
                let (_, wu_new) = self.omegas(s_bar, d, g)?;
                let g_new = self.gamma(d, wu);
                let gap = scaled_gap(wu_new, wu).max(scaled_gap(g_new, g));
                wu = relax(wu, wu_new, a);
                g = relax(g, g_new, a);
                if gap <= opts.tol {
                    break;
                }
            }
            let (wb_new, _) = self.omegas(s_bar, d, g)?;
            wb = relax(wb, wb_new, a);
            d = relax(d, self.delta(z, s_bar, wb, wu, g), a);
            residual = self.residual1(z, s_bar, [d, wb, wu, g])?;
            if !residual.is_finite() {
                break;
            }
            if residual <= opts.tol {
                return Ok(SolutionS1 {
                    delta: d,
                    omega_bar: wb,
                    omega_under: wu,
                    gamma: g,
                    residual,
                    iterations: outer,
                    inner_iterations: inner_total,
                });
            }
        }
        Err(Error::NonConvergence {
            solver: "system 1",
            iterations: opts.max_outer,
            residual,
            last: vec![d, wb, wu, g],
        })
    }

    /// Scaled residual max_k |x_k − T_k(x)| / max(1, |x_k|).
    pub fn residual1(&self, z: f64, s_bar: f64, x: [f64; 4]) -> Result<f64> {
        let r = self.rhs1(z, s_bar, x)?;
        let rhs = [r.delta, r.omega_bar, r.omega_under, r.gamma];
        Ok(x.iter().zip(rhs).map(|(a, b)| scaled_gap(*a, b)).fold(0.0, f64::max))
    }

    pub fn solve_system2(&self, s_under: f64, z: f64, tol: f64, max_iter: usize) -> Result<SolutionS2> {
        if !(z > 0.0) || !(s_under >= 0.0) || !(tol > 0.0) || max_iter == 0 {
            return param("system 2 needs z > 0, s_under >= 0, tol > 0 and max_iter >= 1");
        }
        let mut tau = self.traces[0] / z;
        let mut tau_bar = self.traces[1];
        let mut residual = f64::INFINITY;
        for it in 1..=max_iter {
            tau = self.tau(z, s_under, tau_bar);
            tau_bar = self.tau_bar(s_under, tau);
            residual = scaled_gap(tau, self.tau(z, s_under, tau_bar));
            if residual <= tol {
                return Ok(SolutionS2 { tau, tau_bar, residual, iterations: it });
            }
            if !residual.is_finite() {
                break;
            }
        }
        Err(Error::NonConvergence { solver: "system 2", iterations: max_iter, residual, last: vec![tau, tau_bar] })
    }

    /// System 2 at z = −ζ, Im ζ > 0, by damped simultaneous iteration.
    /// Returns (τ, τ̄, (1/N)Tr G_τ) where the last value is the Stieltjes
    /// transform of the deterministic equivalent of s̲H₁H₁ᴴ.
    pub fn solve_system2_complex(
        &self,
        s_under: f64,
        zeta: Complex64,
        warm_start: Option<(Complex64, Complex64)>,
        opts: &ComplexOptions,
    ) -> Result<(Complex64, Complex64, Complex64)> {
        if !(zeta.im > 0.0) {
            return param(format!("spectral argument needs Im ζ > 0, got {zeta}"));
        }
        if !(opts.damping > 0.0 && opts.damping <= 1.0) || !(opts.tol > 0.0) || !(s_under >= 0.0) {
            return param("complex solver needs damping in (0, 1], tol > 0 and s_under >= 0");
        }
        let z = -zeta;
        let (mut tau, mut tau_bar) = warm_start.unwrap_or((Complex64::from(self.traces[0]) / z, self.traces[1].into()));
        let mut residual = f64::INFINITY;
        for _ in 0..opts.max_iter {
            let t = self.tau(z, s_under, tau_bar);
            let tb = self.tau_bar(s_under, tau);
            residual = scaled_gap(t, tau).max(scaled_gap(tb, tau_bar));
            if residual <= opts.tol {
                let m = self.r1_normalized_resolvent(z, Complex64::from(s_under) * tb);
                return Ok((t, tb, m));
            }
            if !residual.is_finite() {
                break;
            }
            tau = relax(tau, t, opts.damping);
            tau_bar = relax(tau_bar, tb, opts.damping);
        }
        Err(Error::NonConvergence {
            solver: "complex system 2",
            iterations: opts.max_iter,
            residual,
            last: vec![tau.re, tau.im, tau_bar.re, tau_bar.im],
        })
    }

    /// System 1 at z = −ζ, Im ζ > 0, by damped simultaneous iteration.
    pub fn solve_system1_complex(
        &self,
        s_bar: f64,
        zeta: Complex64,
        warm_start: Option<&ComplexSolutionS1>,
        opts: &ComplexOptions,
    ) -> Result<ComplexSolutionS1> {
        if !(zeta.im > 0.0) {
            return param(format!("spectral argument needs Im ζ > 0, got {zeta}"));
        }
        if !(opts.damping > 0.0 && opts.damping <= 1.0) || !(opts.tol > 0.0) {
            return param("complex solver needs damping in (0, 1] and tol > 0");
        }
        let z = -zeta;
        let mut x = match warm_start {
            Some(w) => w.as_array(),
            None => self.tail_guess(z),
        };
        let mut residual = f64::INFINITY;
        for it in 1..=opts.max_iter {
            let r = self.rhs1(z, s_bar, x)?;
            let t = [r.delta, r.omega_bar, r.omega_under, r.gamma];
            residual = x.iter().zip(&t).map(|(a, b)| scaled_gap(*b, *a)).fold(0.0, f64::max);
            if residual <= opts.tol {
                let [delta, omega_bar, omega_under, gamma] = t;
                if !(delta.im > 0.0) && self.traces[0] > 0.0 {
                    return Err(Error::Numerical(format!(
                        "complex fixed point at ζ = {zeta} left the Stieltjes class (Im δ = {:e})",
                        delta.im
                    )));
                }
                return Ok(ComplexSolutionS1 {
                    delta,
                    omega_bar,
                    omega_under,
                    gamma,
                    zeta,
                    residual,
                    iterations: it,
                });
            }
            if !residual.is_finite() {
                break;
            }
            for k in 0..4 {
                x[k] = relax(x[k], t[k], opts.damping);
            }
        }
        Err(Error::NonConvergence {
            solver: "complex system 1",
            iterations: opts.max_iter,
            residual,
            last: x.iter().flat_map(|v| [v.re, v.im]).collect(),
        })
    }
}

/// Iteration controls for the complex-argument solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for ComplexOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200_000, damping: 0.5 }
    }
}

pub fn solve_system2(corr: &CorrelationSet, p: &SystemParams, tol: f64, max_iter: usize) -> Result<SolutionS2> {
    check_inputs(corr, p)?;
    Kernel::new(corr).solve_system2(p.s_under, p.z, tol, max_iter)
}

pub fn solve_system1_complex(
    corr: &CorrelationSet,
    s_bar: f64,
    zeta: Complex64,
    warm_start: Option<&ComplexSolutionS1>,
    opts: &ComplexOptions,
) -> Result<ComplexSolutionS1> {
    if !(s_bar >= 0.0) {
        return param("s_bar must be nonnegative");
    }
    Kernel::new(corr).solve_system1_complex(s_bar, zeta, warm_start, opts)
}

/// Unscaled |lhs − rhs| of the four equations of system 1.
pub fn residuals_system1(corr: &CorrelationSet, p: &SystemParams, sol: &SolutionS1) -> Result<[f64; 4]> {
    corr.check_dims(p)?;
    let k = Kernel::new(corr);
    let x = sol.as_array();
    let r = k.rhs1(p.z, p.s_bar, x)?;
    Ok([
        (x[0] - r.delta).abs(),
        (x[1] - r.omega_bar).abs(),
        (x[2] - r.omega_under).abs(),
        (x[3] - r.gamma).abs(),
    ])
}

/// Box known to contain the positive solution of system 1, built from the
/// smallest normalized trace l and the spectral norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionBounds {
    pub lower: [f64; 4],
    pub upper: [f64; 4],
}

impl SolutionBounds {
    pub fn contains(&self, x: [f64; 4]) -> bool {
        (0..4).all(|k| self.lower[k] <= x[k] && x[k] <= self.upper[k])
    }
}

pub fn solution_bounds(corr: &CorrelationSet, p: &SystemParams) -> SolutionBounds {
    let (n, l, m) = (p.n as f64, p.l as f64, p.m as f64);
    let [nr1, nt1, nr2, nt2] = corr.norms();
    let lmin = corr.normalized_traces().iter().cloned().fold(f64::INFINITY, f64::min);
    let r = nr1.max(nt1).max(nr2).max(nt2);
    let (s, z) = (p.s_bar, p.z);
    let r4 = r.powi(4);
    let lower_w = lmin / (1.0 + n * (s * r * r + r4) / (l * z));
    SolutionBounds {
        lower: [
            n * lmin / (l * (z + s * r * r + r4)),
            lower_w,
            lower_w,
            lmin / (1.0 + n * r4 / (m * z)),
        ],
        upper: [n * nr1 / (l * z), nt1, nr2 * nt1, nt2],
    }
}

/// Antenna ratios c₁ = N/L and c₂ = L/M of the i.i.d. case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct IidParams {
    pub c1: f64,
    pub c2: f64,
}

impl IidParams {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(c1 > 0.0 && c2 > 0.0) || !c1.is_finite() || !c2.is_finite() {
            return param(format!("c1 and c2 must be positive, got ({c1}, {c2})"));
        }
        Ok(Self { c1, c2 })
    }

    pub fn from_dims(n: usize, l: usize, m: usize) -> Result<Self> {
        Self::new(n as f64 / l as f64, l as f64 / m as f64)
    }
}

/// The quartic L_F(m) = c₁c₂·m·u·w + (s̄+1)·m·u + zm − 1 with
/// u = c₁zm + 1 − c₁ and w = zm − 1 + s̄mu.
pub fn iid_quartic(iid: &IidParams, s_bar: f64, z: f64, m: f64) -> f64 {
    let IidParams { c1, c2 } = *iid;
    let u = c1 * z * m + 1.0 - c1;
    let w = z * m - 1.0 + s_bar * m * u;
    c1 * c2 * m * u * w + (s_bar + 1.0) * m * u + z * m - 1.0
}

/// Bracket (max(0, (1 − 1/c₁)/z), 1/z) holding the positive roots of both
/// i.i.d. equations.
pub fn iid_bracket(c1: f64, z: f64) -> (f64, f64) {
    (((1.0 - 1.0 / c1) / z).max(0.0), 1.0 / z)
}

/// Root of the quartic in the bracket: bisection then secant polish.
pub fn iid_m_f(iid: &IidParams, s_bar: f64, z: f64, tol: f64) -> Result<f64> {
    if !(z > 0.0) || !(s_bar >= 0.0) {
        return param("iid quartic needs z > 0 and s_bar >= 0");
    }
    let f = |m: f64| iid_quartic(iid, s_bar, z, m);
    let (mut lo, mut hi) = iid_bracket(iid.c1, z);
    let (mut flo, fhi) = (f(lo), f(hi));
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::Internal(format!(
            "quartic bracket sign condition failed: L_F({lo}) = {flo:e}, L_F({hi}) = {fhi:e}"
        )));
    }
    let width = 1e-13 * hi;
    let mut fhi = fhi;
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let mut best = if flo.abs() < fhi.abs() { lo } else { hi };
    let secant = lo - flo * (hi - lo) / (fhi - flo);
    if secant.is_finite() && secant > lo && secant < hi && f(secant).abs() < f(best).abs() {
        best = secant;
    }
    if f(best).abs() > tol.max(1e-9) {
        return Err(Error::Internal(format!("quartic root residual {:e} after refinement", f(best))));
    }
    Ok(best)
}

/// Positive root of s̲m(c₁zm + 1 − c₁) + zm − 1 = 0.
pub fn iid_m_g(c1: f64, s_under: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !(s_under >= 0.0) || !(c1 > 0.0) {
        return param("iid quadratic needs c1 > 0, z > 0 and s_under >= 0");
    }
    let a = s_under * c1 * z;
    let b = s_under * (1.0 - c1) + z;
    let disc = (b * b + 4.0 * a).sqrt();
    Ok(if b >= 0.0 { 2.0 / (b + disc) } else { (disc - b) / (2.0 * a) })
}
