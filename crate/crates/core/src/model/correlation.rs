//! Angular-spread correlation matrices for a uniform linear array.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::HermitianPsd;
use crate::error::{numerical, param, Result};
use crate::linalg::CMat;

/// Quadrature settings for [`build_correlation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationQuadrature {
    /// Initial number of composite panels over [−180, 180].
    pub panels: usize,
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Accept once doubling the panel count changes no entry by more than this.
    pub tol: f64,
    /// Give up beyond this many panels.
    pub max_panels: usize,
}

impl Default for CorrelationQuadrature {
    fn default() -> Self {
        Self { panels: 64, order: 16, tol: 1e-9, max_panels: 1 << 14 }
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// c_k = ∫ w(φ) exp(j2π d_s k sin(πφ/180)) dφ for k = 0..n, w the Gaussian window.
fn lag_values(eta: f64, dc: f64, d_s: f64, n: usize, panels: usize, gl: &(Vec<f64>, Vec<f64>)) -> Vec<Complex64> {
    let (x, w) = gl;
    let h = 360.0 / panels as f64;
    let norm = 1.0 / (2.0 * PI * dc * dc).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for p in 0..panels {
        let mid = -180.0 + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(w) {
            let phi = mid + 0.5 * h * xi;
            let g = norm * (-(phi - eta).powi(2) / (2.0 * dc * dc)).exp() * 0.5 * h * wi;
            if g == 0.0 {
                continue;
            }
            let theta = 2.0 * PI * d_s * (PI * phi / 180.0).sin();
            for (k, o) in out.iter_mut().enumerate() {
                *o += Complex64::from_polar(g, theta * k as f64);
            }
        }
    }
    out
}

/// Correlation matrix of an n-element array with mean angle `eta_deg`,
/// Gaussian angular spread `delta_c_deg` and element spacing `d_s` wavelengths.
///
/// Entry (m, n′) is ∫ exp(j2π d_s (m−n′) sin φ) · N(φ; η, δ_c²) dφ over
/// φ ∈ [−180°, 180°]; the window is not renormalized to the truncated range.
pub fn build_correlation(eta_deg: f64, delta_c_deg: f64, d_s: f64, n: usize) -> Result<HermitianPsd> {
    build_correlation_with(eta_deg, delta_c_deg, d_s, n, CorrelationQuadrature::default())
}

pub fn build_correlation_with(
    eta_deg: f64,
    delta_c_deg: f64,
    d_s: f64,
    n: usize,
    q: CorrelationQuadrature,
) -> Result<HermitianPsd> {
    if !(delta_c_deg > 0.0) || !delta_c_deg.is_finite() {
        return param(format!("angle spread must be positive, got {delta_c_deg}"));
    }
    if !(d_s >= 0.0) || !d_s.is_finite() || !eta_deg.is_finite() {
        return param("antenna spacing must be nonnegative and the mean angle finite");
    }
    if n == 0 {
        return param("array size must be positive");
    }
    let gl = gauss_legendre(q.order);
    let mut panels = q.panels.max(1);
    let mut coarse = lag_values(eta_deg, delta_c_deg, d_s, n, panels, &gl);
    let lags = loop {
        if panels * 2 > q.max_panels {
            return numerical(format!(
                "correlation quadrature did not settle within {} panels",
                q.max_panels
            ));
        }
        let fine = lag_values(eta_deg, delta_c_deg, d_s, n, panels * 2, &gl);
        let gap = coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        panels *= 2;
        if gap <= q.tol {
            break fine;
        }
        coarse = fine;
    };
    // Exactly Hermitian Toeplitz by construction.
    let m = CMat::from_fn(n, n, |i, j| if i >= j { lags[i - j] } else { lags[j - i].conj() });
    HermitianPsd::new(m)
}
