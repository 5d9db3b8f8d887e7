//! Deterministic equivalents built on the fixed points: the resolvent
//! approximations, the trace functionals, the means of I₁ and I₂, the CLT
//! covariance, outage quantities and the i.i.d. closed forms.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::Serialize;
use statrs::function::erf;

use crate::error::{numerical, param, Error, Result};
use crate::fixed_point::{self, IidParams, Kernel, SolutionS1, SolutionS2, SolverOptions};
use crate::linalg::{c, Mat};
use crate::model::{CorrelationSet, HermitianPsd, SystemParams};

/// 2×2 real matrix in row-major nested form.
pub type Cov2 = [[f64; 2]; 2];

fn mat(h: &HermitianPsd) -> Mat {
    Mat::from_dense(h.matrix())
}

/// The five approximating matrices F_δ, F_ω, F_γ, G_τ, G_τ̄.
#[derive(Debug, Clone, PartialEq)]
pub struct DetMatrices {
    pub f_delta: Mat,
    /// Not Hermitian in general.
    pub f_omega: Mat,
    pub f_gamma: Mat,
    pub g_tau: Mat,
    pub g_tau_bar: Mat,
    /// |(1/L)Tr R₁F_δ − δ|, |(1/L)Tr T₁F_ω − ω̄|, |(1/L)Tr R₂T₁F_ω − ω̲|,
    /// |(1/M)Tr T₂F_γ − γ|, |(1/L)Tr R₁G_τ − τ|, |(1/L)Tr T₁G_τ̄ − τ̄|.
    pub consistency: [f64; 6],
}

pub fn det_matrices(corr: &CorrelationSet, p: &SystemParams, s1: &SolutionS1, s2: &SolutionS2) -> Result<DetMatrices> {
    corr.check_dims(p)?;
    let (l, m) = (p.l as f64, p.m as f64);
    let (r1, t1, r2, t2) = (mat(&corr.r1), mat(&corr.t1), mat(&corr.r2), mat(&corr.t2));
    let SolutionS1 { delta: d, omega_bar: wb, omega_under: wu, gamma: g, .. } = *s1;
    let internal = |e: Error| Error::Internal(format!("deterministic matrix inversion failed: {e}"));
    let f_delta = r1.scale(c(p.s_bar * wb + g * wu)).shift(c(p.z)).inverse(true).map_err(internal)?;
    let r2t1 = r2.mul(&t1);
    let f_omega = t1.scale(c(p.s_bar * d)).add(&r2t1.scale(c(d * g))).shift(c(1.0)).inverse(false).map_err(internal)?;
    let f_gamma = t2.scale(c(l / m * d * wu)).shift(c(1.0)).inverse(true).map_err(internal)?;
    let g_tau = r1.scale(c(p.s_under * s2.tau_bar)).shift(c(p.z)).inverse(true).map_err(internal)?;
    let g_tau_bar = t1.scale(c(p.s_under * s2.tau)).shift(c(1.0)).inverse(true).map_err(internal)?;
    let consistency = [
        (r1.trace_mul(&f_delta).re / l - d).abs(),
        (t1.trace_mul(&f_omega).re / l - wb).abs(),
        (r2t1.trace_mul(&f_omega).re / l - wu).abs(),
        (t2.trace_mul(&f_gamma).re / m - g).abs(),
        (r1.trace_mul(&g_tau).re / l - s2.tau).abs(),
        (t1.trace_mul(&g_tau_bar).re / l - s2.tau_bar).abs(),
    ];
    Ok(DetMatrices { f_delta, f_omega, f_gamma, g_tau, g_tau_bar, consistency })
}

/// Scalar trace functionals. Names follow the usual notation: a trailing `_i`
/// marks the variant whose last factor is the bare resolvent, and mixed
/// terms are indexed by their powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Functionals {
    pub delta2: f64,
    pub delta3: f64,
    pub delta2_i: f64,
    pub delta3_i: f64,
    pub omega_bar2: f64,
    pub omega_bar3: f64,
    pub omega_under2: f64,
    pub omega_under3: f64,
    pub omega_under2_i: f64,
    pub omega_under3_i: f64,
    /// (1/L)Tr[(T₁F_ω)^k (R₂T₁F_ω)^l] for (k, l) = (1,1), (1,2), (2,1).
    pub omega_mixed11: f64,
    pub omega_mixed12: f64,
    pub omega_mixed21: f64,
    /// (1/L)Tr[(T₁F_ω)^k (R₂T₁F_ω)^{l−1} F_ω] for (k, l) = (1,1), (1,2).
    pub omega_mixed11_i: f64,
    pub omega_mixed12_i: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub varsigma: f64,
    pub big_delta: f64,
    pub delta_v1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub tau2_i: f64,
    pub tau_bar2: f64,
    pub tau_bar3: f64,
    pub delta_v2: f64,
    pub vartheta: f64,
    pub phi_bar: f64,
    pub phi_under: f64,
    /// (1/L)Tr[(R₁G_τ)^k (R₁F_δ)^l] for (k, l) = (1,2), (2,1).
    pub vartheta12: f64,
    pub vartheta21: f64,
    /// (1/L)Tr[R₁G_τ F_δ] and (1/L)Tr[G_τ R₁F_δ].
    pub vartheta11_i: f64,
    pub vartheta1i1: f64,
    pub phi_bar12: f64,
    pub phi_under12: f64,
    /// (1/L)Tr[T₁G_τ̄T₁F_ωR₂T₁F_ω] and (1/L)Tr[T₁G_τ̄T₁F_ωT₁F_ωR₂].
    pub phi_mixed12: f64,
    pub phi_mixed12_tilde: f64,
    pub delta_c: f64,
}

pub fn functionals(
    corr: &CorrelationSet,
    dm: &DetMatrices,
    s1: &SolutionS1,
    _s2: &SolutionS2,
    p: &SystemParams,
) -> Functionals {
    let (l, m) = (p.l as f64, p.m as f64);
    let (s, su) = (p.s_bar, p.s_under);
    let SolutionS1 { delta: d, gamma: g, .. } = *s1;
    let (r1, t1, r2, t2) = (mat(&corr.r1), mat(&corr.t1), mat(&corr.r2), mat(&corr.t2));
    let a = r1.mul(&dm.f_delta);
    let b = t1.mul(&dm.f_omega);
    let cc = r2.mul(&b);
    let dd = t2.mul(&dm.f_gamma);
    let e = r1.mul(&dm.g_tau);
    let gg = t1.mul(&dm.g_tau_bar);
    let bw = b.mul(&r2);
    let tl = |x: &Mat, y: &Mat| x.trace_mul(y).re / l;
    let a2 = a.mul(&a);
    let b2 = b.mul(&b);
    let c2 = cc.mul(&cc);
    let e2 = e.mul(&e);
    let g2m = gg.mul(&gg);
    let bc = b.mul(&cc);

    let delta2 = tl(&a, &a);
    let omega_bar2 = tl(&b, &b);
    let omega_under2 = tl(&cc, &cc);
    let omega_under2_i = tl(&cc, &dm.f_omega);
    let omega_mixed11 = tl(&b, &cc);
    let gamma2 = dd.trace_mul(&dd).re / m;
    let varsigma = 2.0 * s * g * omega_mixed11 + g * g * omega_under2 + s * s * omega_bar2;
    let big_delta = 1.0 - l / m * gamma2 * omega_under2 * d * d;
    let delta_v1 = (1.0 - varsigma * delta2) * big_delta - l / m * gamma2 * omega_under2_i.powi(2) * delta2;
    let tau2 = tl(&e, &e);
    let tau_bar2 = tl(&gg, &gg);
    let delta_v2 = 1.0 - su * su * tau2 * tau_bar2;
    let vartheta = tl(&e, &a);
    let phi_bar = tl(&gg, &b);
    let phi_under = tl(&gg, &bw);
    let delta_c = 1.0 - su * vartheta * (g * phi_under + s * phi_bar);

    Functionals {
        delta2,
        delta3: tl(&a2, &a),
        delta2_i: tl(&a, &dm.f_delta),
        delta3_i: tl(&a2, &dm.f_delta),
        omega_bar2,
        omega_bar3: tl(&b2, &b),
        omega_under2,
        omega_under3: tl(&c2, &cc),
        omega_under2_i,
        omega_under3_i: tl(&c2, &dm.f_omega),
        omega_mixed11,
        omega_mixed12: tl(&b, &c2),
        omega_mixed21: tl(&b2, &cc),
        omega_mixed11_i: tl(&b, &dm.f_omega),
        omega_mixed12_i: tl(&bc, &dm.f_omega),
        gamma2,
        gamma3: dd.mul(&dd).trace_mul(&dd).re / m,
        varsigma,
        big_delta,
        delta_v1,
        tau2,
        tau3: tl(&e2, &e),
        tau2_i: tl(&e, &dm.g_tau),
        tau_bar2,
        tau_bar3: tl(&g2m, &gg),
        delta_v2,
        vartheta,
        phi_bar,
        phi_under,
        vartheta12: tl(&e, &a2),
        vartheta21: tl(&e2, &a),
        vartheta11_i: tl(&e, &dm.f_delta),
        vartheta1i1: tl(&dm.g_tau, &a),
        phi_bar12: tl(&gg, &b2),
        phi_under12: tl(&gg, &bw.mul(&bw)),
        phi_mixed12: tl(&gg, &bc),
        phi_mixed12_tilde: tl(&gg, &b.mul(&bw)),
        delta_c,
    }
}

/// The 4×4 matrix whose determinant equals Δ_{V₁}.
pub fn k1_matrix(f: &Functionals, s1: &SolutionS1, p: &SystemParams) -> Matrix4<f64> {
    let SolutionS1 { delta: d, omega_under: wu, gamma: g, .. } = *s1;
    let (s, lm) = (p.s_bar, p.l as f64 / p.m as f64);
    Matrix4::new(
        1.0,
        s * f.delta2,
        g * f.delta2,
        wu * f.delta2,
        s * f.omega_bar2 + g * f.omega_mixed11,
        1.0,
        0.0,
        d * f.omega_mixed11,
        s * f.omega_mixed11 + g * f.omega_under2,
        0.0,
        1.0,
        d * f.omega_under2,
        lm * wu * f.gamma2,
        0.0,
        lm * d * f.gamma2,
        1.0,
    )
}

/// The 2×2 matrix whose determinant equals Δ_{V₂}.
pub fn k2_matrix(f: &Functionals, p: &SystemParams) -> Matrix2<f64> {
    Matrix2::new(1.0, p.s_under * f.tau2, p.s_under * f.tau_bar2, 1.0)
}

/// Right-hand sides of the two trace identities
/// δ = zδ₂,I + (s̄ω̄ + γω̲)δ₂ and ω̲ = ω̲₂,I + s̄δ·(ω̄ω̲)₁,₁ + δγω̲₂.
pub fn trace_identities(f: &Functionals, s1: &SolutionS1, p: &SystemParams) -> (f64, f64) {
    let SolutionS1 { delta: d, omega_bar: wb, omega_under: wu, gamma: g, .. } = *s1;
    let s = p.s_bar;
    (
        p.z * f.delta2_i + (s * wb + g * wu) * f.delta2,
        f.omega_under2_i + s * d * f.omega_mixed11 + d * g * f.omega_under2,
    )
}

/// Ī₁ = logdet(I + ((s̄ω̄+γω̲)/z)R₁) + logdet(I + s̄δT₁ + δγR₂T₁)
///      + logdet(I + (L/M)δω̲T₂) − s̄Lδω̄ − 2Lδω̲γ,
/// the middle term taken on its Hermitian-similar form.
pub fn mean_i1(corr: &CorrelationSet, p: &SystemParams, s1: &SolutionS1) -> Result<f64> {
    corr.check_dims(p)?;
    let (l, m) = (p.l as f64, p.m as f64);
    let SolutionS1 { delta: d, omega_bar: wb, omega_under: wu, gamma: g, .. } = *s1;
    let s = p.s_bar;
    let first = mat(&corr.r1).scale(c((s * wb + g * wu) / p.z)).logdet_identity_plus()?;
    let t1 = mat(&corr.t1);
    let kmat = hermitian_similar_k(corr);
    let middle = t1.scale(c(s * d)).add(&kmat.scale(c(d * g))).logdet_identity_plus()?;
    let last = mat(&corr.t2).scale(c(l / m * d * wu)).logdet_identity_plus()?;
    Ok(first + middle + last - s * l * d * wb - 2.0 * l * d * wu * g)
}

/// K = T₁^{1/2} R₂ T₁^{1/2}.
fn hermitian_similar_k(corr: &CorrelationSet) -> Mat {
    let (t1, r2) = (mat(&corr.t1), mat(&corr.r2));
    if t1.is_diag() {
        // Diagonal T₁: K = diag(√t) R₂ diag(√t).
        let Mat::Diag(t) = &t1 else { unreachable!() };
        let half = Mat::Diag(t.iter().map(|v| c(v.re.max(0.0).sqrt())).collect());
        return half.mul(&r2).mul(&half);
    }
    let half = Mat::Full(corr.t1.sqrt());
    Mat::Full(crate::linalg::hermitize(&half.mul(&r2).mul(&half).dense()))
}

/// Ī₂ = logdet(I + (s̲τ̄/z)R₁) + logdet(I + s̲τT₁) − Ls̲ττ̄.
pub fn mean_i2(corr: &CorrelationSet, p: &SystemParams, s2: &SolutionS2) -> Result<f64> {
    corr.check_dims(p)?;
    let su = p.s_under;
    let first = mat(&corr.r1).scale(c(su * s2.tau_bar / p.z)).logdet_identity_plus()?;
    let second = mat(&corr.t1).scale(c(su * s2.tau)).logdet_identity_plus()?;
    Ok(first + second - p.l as f64 * su * s2.tau * s2.tau_bar)
}

fn neg_log(x: f64, name: &str) -> Result<f64> {
    if !(x > 0.0) {
        return numerical(format!("{name} = {x:e} is not positive; the fixed point is not trustworthy"));
    }
    Ok(-x.ln())
}

/// V = [[−log Δ_{V₁}, −log Δ_C], [−log Δ_C, −log Δ_{V₂}]].
pub fn covariance_v(f: &Functionals) -> Result<Cov2> {
    covariance_from_deltas(f.delta_v1, f.delta_v2, f.delta_c)
}

fn covariance_from_deltas(dv1: f64, dv2: f64, dc: f64) -> Result<Cov2> {
    let v11 = neg_log(dv1, "Δ_V1")?;
    let v22 = neg_log(dv2, "Δ_V2")?;
    let v12 = neg_log(dc, "Δ_C")?;
    Ok([[v11, v12], [v12, v22]])
}

/// Mean pair and covariance of the joint Gaussian approximation of (I₁, I₂).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianModel {
    pub mean_i1: f64,
    pub mean_i2: f64,
    pub v: Cov2,
    pub s_bar: f64,
    pub s_under: f64,
}

impl GaussianModel {
    /// Ī = Ī₁ − Ī₂.
    pub fn mean_mi(&self) -> f64 {
        self.mean_i1 - self.mean_i2
    }

    /// Variance of I₁ − I₂: V₁₁ + V₂₂ − 2V₁₂.
    pub fn mi_variance(&self) -> f64 {
        self.v[0][0] + self.v[1][1] - 2.0 * self.v[0][1]
    }

    pub fn inverse_v(&self) -> Result<Cov2> {
        let [[a, b], [_, d]] = self.v;
        let det = a * d - b * b;
        if !(det.abs() > 0.0) || !det.is_finite() {
            return numerical("covariance matrix is singular");
        }
        Ok([[d / det, -b / det], [-b / det, a / det]])
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let [[a, b], [_, d]] = self.v;
        let mean = 0.5 * (a + d);
        mean - (0.25 * (a - d).powi(2) + b * b).sqrt()
    }
}

/// Everything the analysis produces for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub system1: SolutionS1,
    pub system2: SolutionS2,
    pub matrices: DetMatrices,
    pub functionals: Functionals,
    pub model: GaussianModel,
}

/// Solves both systems and evaluates means, functionals and V.
pub fn analyze(corr: &CorrelationSet, p: &SystemParams, opts: &SolverOptions) -> Result<Analysis> {
    corr.check_dims(p)?;
    corr.check_traces()?;
    p.validate()?;
    let kernel = Kernel::new(corr);
    let system1 = kernel.solve_system1(p.s_bar, p.z, opts)?;
    let system2 = kernel.solve_system2(p.s_under, p.z, opts.tol, opts.max_outer.saturating_mul(opts.max_inner))?;
    let matrices = det_matrices(corr, p, &system1, &system2)?;
    let functionals = functionals(corr, &matrices, &system1, &system2, p);
    let model = GaussianModel {
        mean_i1: mean_i1(corr, p, &system1)?,
        mean_i2: mean_i2(corr, p, &system2)?,
        v: covariance_v(&functionals)?,
        s_bar: p.s_bar,
        s_under: p.s_under,
    };
    Ok(Analysis { system1, system2, matrices, functionals, model })
}

/// Q(x) = P(N(0,1) > x).
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of Q on (0, 1): library inverse-erfc start, Newton polish.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return param(format!("Q⁻¹ needs an argument in (0, 1), got {p}"));
    }
    let mut x = std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p);
    for _ in 0..50 {
        let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if pdf == 0.0 {
            break;
        }
        let step = (q_function(x) - p) / pdf;
        x += step;
        if step.abs() <= 1e-12 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

fn outage_sd(gm: &GaussianModel) -> Result<f64> {
    if gm.s_bar != gm.s_under {
        return param(format!(
            "outage analysis needs equal relay-noise arguments, got s_bar = {} and s_under = {}",
            gm.s_bar, gm.s_under
        ));
    }
    let v = gm.mi_variance();
    if !(v > 0.0) {
        return numerical(format!("variance of the mutual information is {v:e}"));
    }
    Ok(v.sqrt())
}

/// P(I < R) ≈ 1 − Q((R − Ī)/√v).
pub fn outage_probability(gm: &GaussianModel, rate: f64) -> Result<f64> {
    let sd = outage_sd(gm)?;
    Ok(1.0 - q_function((rate - gm.mean_mi()) / sd))
}

/// Rate whose outage probability is `p_out`: Ī + √v·Q⁻¹(1 − p_out).
pub fn outage_rate(gm: &GaussianModel, p_out: f64) -> Result<f64> {
    let sd = outage_sd(gm)?;
    if !(p_out > 0.0 && p_out < 1.0) {
        return param(format!("outage probability must lie in (0, 1), got {p_out}"));
    }
    Ok(gm.mean_mi() + sd * q_inverse(1.0 - p_out)?)
}

/// Roots m_F, m_G of the i.i.d. equations at relay noise σ₁² and receiver noise σ₂².
pub fn iid_roots(iid: &IidParams, s1_sq: f64, s2_sq: f64) -> Result<(f64, f64)> {
    let mf = fixed_point::iid_m_f(iid, s1_sq, s2_sq, 1e-14)?;
    let mg = fixed_point::iid_m_g(iid.c1, s1_sq, s2_sq)?;
    Ok((mf, mg))
}

fn check_noise(s1_sq: f64, s2_sq: f64) -> Result<()> {
    if !(s1_sq >= 0.0) || !(s2_sq > 0.0) || !s1_sq.is_finite() || !s2_sq.is_finite() {
        return param(format!("need σ₁² ≥ 0 and σ₂² > 0, got ({s1_sq}, {s2_sq})"));
    }
    Ok(())
}

/// Closed-form means (Ī₁, Ī₂) for identity correlations with N receive antennas.
pub fn iid_means(iid: &IidParams, n: usize, s1_sq: f64, s2_sq: f64) -> Result<(f64, f64)> {
    check_noise(s1_sq, s2_sq)?;
    let IidParams { c1, c2 } = *iid;
    let nf = n as f64;
    let (l, m) = (nf / c1, nf / (c1 * c2));
    let (mf, mg) = iid_roots(iid, s1_sq, s2_sq)?;
    let z = s2_sq;
    let u = c1 * z * mf + 1.0 - c1;
    let w = z * mf - 1.0 + s1_sq * mf * u;
    let i1 = -nf * (z * mf).ln() - l * u.ln() - m * (c1 * c2 * w).ln_1p() + nf * (2.0 * z * mf - 2.0 + s1_sq * mf * u);
    let ug = c1 * z * mg + 1.0 - c1;
    let i2 = -nf * (z * mg).ln() - l * ug.ln() + nf * (z * mg - 1.0);
    Ok((i1, i2))
}

/// Δ_{V₁}, Δ_{V₂}, Δ_C in closed form for identity correlations.
///
/// Δ_{V₂} is evaluated as 1 − c₁(1 − σ₂²m_G)², which equals the usual
/// (σ₂²/σ₁² + 1 + c₁)σ₂²m_G + 1 − c₁ − σ₂²/σ₁² but stays finite at σ₁² = 0.
pub fn iid_deltas(iid: &IidParams, s1_sq: f64, s2_sq: f64) -> Result<(f64, f64, f64)> {
    check_noise(s1_sq, s2_sq)?;
    let IidParams { c1, c2 } = *iid;
    let (mf, mg) = iid_roots(iid, s1_sq, s2_sq)?;
    let z = s2_sq;
    let u = c1 * z * mf + 1.0 - c1;
    let w = z * mf - 1.0 + s1_sq * mf * u;
    let dv1 = 1.0 + (2.0 * z + (c1 - 1.0) * (s1_sq + c2 + 1.0)) * w - c1 * (z * mf - 1.0).powi(2)
        + (c1 - 1.0) / c1
        + (c1 + 1.0) / c1 * u
        + (2.0 * (s1_sq + 1.0) + c2 * (c1 + 1.0)) * w * u;
    let dv2 = 1.0 - c1 * (1.0 - z * mg).powi(2);
    let dc = 1.0 - c1 * (1.0 - z * mf) * (1.0 - z * mg);
    Ok((dv1, dv2, dc))
}

pub fn iid_covariance(iid: &IidParams, s1_sq: f64, s2_sq: f64) -> Result<Cov2> {
    let (dv1, dv2, dc) = iid_deltas(iid, s1_sq, s2_sq)?;
    covariance_from_deltas(dv1, dv2, dc)
}

/// Limit of the i.i.d. model as L grows faster than N = M·c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LargeL {
    pub m: f64,
    pub mean: f64,
    pub delta_v1: f64,
    pub variance: f64,
}

/// Root of c·σ²m² + (σ² + 1 − c)m − 1 = 0 with σ² = σ₁² + σ₂², the limiting
/// mean of I = I₁ − I₂ for N receive antennas (M = N/c) and the limiting
/// variance −log Δ_{V₁}.
pub fn iid_large_l(c_ratio: f64, n: f64, s1_sq: f64, s2_sq: f64) -> Result<LargeL> {
    check_noise(s1_sq, s2_sq)?;
    if !(c_ratio > 0.0) || !c_ratio.is_finite() {
        return param(format!("c must be positive, got {c_ratio}"));
    }
    let sig = s1_sq + s2_sq;
    let (a, b) = (c_ratio * sig, sig + 1.0 - c_ratio);
    let disc = (b * b + 4.0 * a).sqrt();
    let m = if b >= 0.0 { 2.0 / (b + disc) } else { (disc - b) / (2.0 * a) };
    if !(n > 0.0) {
        return param(format!("N must be positive, got {n}"));
    }
    let (nf, mf) = (n, n / c_ratio);
    let mean = -nf * (sig * m).ln() - mf * (c_ratio * sig * m - c_ratio).ln_1p() + nf * (sig * m - 1.0);
    let delta_v1 = (sig + 1.0 + c_ratio) * sig * m + 1.0 - c_ratio - sig;
    Ok(LargeL { m, mean, delta_v1, variance: neg_log(delta_v1, "limiting Δ_V1")? })
}

/// Hermitian-similar and literal forms of the middle log-determinant of Ī₁;
/// exposed so the two can be compared.
pub fn middle_logdets(corr: &CorrelationSet, s_bar: f64, delta: f64, gamma: f64) -> Result<(f64, f64)> {
    let t1 = corr.t1.matrix();
    let herm = mat(&corr.t1).scale(c(s_bar * delta)).add(&hermitian_similar_k(corr).scale(c(delta * gamma)));
    let herm = herm.logdet_identity_plus()?;
    let l = t1.nrows();
    let literal = crate::linalg::eye(l) + t1 * c(s_bar * delta) + corr.r2.matrix() * t1 * c(delta * gamma);
    let det: Complex64 = literal.lu().determinant();
    Ok((herm, det.ln().re))
}
