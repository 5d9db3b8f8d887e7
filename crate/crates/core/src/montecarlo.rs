//! Monte Carlo ground truth: Kronecker channel draws, the exact mutual
//! information pair, empirical moments, Mahalanobis/χ² diagnostics, empirical
//! spectra and convergence-rate regressions.
//!
//! Every draw uses its own ChaCha8 stream keyed by `(seed, sample index)`, and
//! moments are reduced sequentially over the index-ordered values, so results
//! do not depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::deterministic::{analyze, Cov2, GaussianModel};
use crate::error::{param, Error, Result};
use crate::fixed_point::SolverOptions;
use crate::linalg::{c, gemm, herm_eigenvalues, logdet_hpd, CMat, Op};
use crate::model::{CorrelationSet, HermitianPsd, SystemParams};
use crate::output::{csv_table, fmt_num};

/// One draw of the two hops.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    /// N×L.
    pub h1: CMat,
    /// L×M.
    pub h2: CMat,
}

/// Square roots of the correlation matrices, computed once per run.
/// Identity factors are skipped.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    n: usize,
    l: usize,
    m: usize,
    r1: Option<CMat>,
    t1: Option<CMat>,
    r2: Option<CMat>,
    t2: Option<CMat>,
}

fn root(h: &HermitianPsd) -> Result<Option<CMat>> {
    Ok(if h.is_identity() { None } else { Some(h.sqrt()) })
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, var: f64) -> CMat {
    let scale = (0.5 * var).sqrt();
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        num_complex::Complex64::new(scale * re, scale * im)
    })
}

fn sandwich(left: &Option<CMat>, x: CMat, right: &Option<CMat>) -> CMat {
    let x = match left {
        Some(a) => gemm(a, Op::N, &x, Op::N),
        None => x,
    };
    match right {
        Some(b) => gemm(&x, Op::N, b, Op::N),
        None => x,
    }
}

impl ChannelSampler {
    pub fn new(corr: &CorrelationSet) -> Result<Self> {
        Ok(Self {
            n: corr.n(),
            l: corr.l(),
            m: corr.m(),
            r1: root(&corr.r1)?,
            t1: root(&corr.t1)?,
            r2: root(&corr.r2)?,
            t2: root(&corr.t2)?,
        })
    }

    /// H₁ = R₁^{1/2}X₁T₁^{1/2}, H₂ = R₂^{1/2}X₂T₂^{1/2}; X₁ entries have
    /// variance 1/L and X₂ entries 1/M.
    pub fn sample(&self, seed: u64, index: u64) -> ChannelSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let x1 = gaussian(&mut rng, self.n, self.l, 1.0 / self.l as f64);
        let x2 = gaussian(&mut rng, self.l, self.m, 1.0 / self.m as f64);
        ChannelSample { h1: sandwich(&self.r1, x1, &self.t1), h2: sandwich(&self.r2, x2, &self.t2) }
    }
}

pub fn sample_channel(corr: &CorrelationSet, stream_index: u64, seed: u64) -> Result<ChannelSample> {
    Ok(ChannelSampler::new(corr)?.sample(seed, stream_index))
}

/// Gram blocks of a draw: H₁H₁ᴴ and H₁H₂H₂ᴴH₁ᴴ.
fn grams(ch: &ChannelSample) -> (CMat, CMat) {
    let p = gemm(&ch.h1, Op::N, &ch.h1, Op::H);
    let g = gemm(&ch.h1, Op::N, &ch.h2, Op::N);
    (p, gemm(&g, Op::N, &g, Op::H))
}

/// B = H₁H₂H₂ᴴH₁ᴴ + s̄H₁H₁ᴴ.
pub fn b_matrix(ch: &ChannelSample, s_bar: f64) -> CMat {
    let (p, q) = grams(ch);
    q + p * c(s_bar)
}

/// (1/N)Tr(B + zI)⁻¹ for one draw.
pub fn resolvent_trace(ch: &ChannelSample, s_bar: f64, z: f64) -> Result<f64> {
    let n = ch.h1.nrows();
    let a = b_matrix(ch, s_bar) + CMat::identity(n, n) * c(z);
    let inv = crate::linalg::inverse_hpd(a)?;
    Ok(crate::linalg::trace(&inv).re / n as f64)
}

/// (I₁, I₂) in nats: logdet(I + (H₁H₂H₂ᴴH₁ᴴ + s̄H₁H₁ᴴ)/z) and logdet(I + (s̲/z)H₁H₁ᴴ).
pub fn mi_pair(ch: &ChannelSample, p: &SystemParams) -> Result<(f64, f64)> {
    if !(p.z > 0.0) {
        return param(format!("z must be positive, got {}", p.z));
    }
    let n = ch.h1.nrows();
    let (gram1, gram12) = grams(ch);
    let id = CMat::identity(n, n);
    let a1 = &id + (gram12 + &gram1 * c(p.s_bar)) * c(1.0 / p.z);
    let a2 = id + gram1 * c(p.s_under / p.z);
    Ok((logdet_hpd(&a1)?, logdet_hpd(&a2)?))
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct Sum {
    s: f64,
    comp: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        self.comp += if self.s.abs() >= x.abs() { (self.s - t) + x } else { (x - t) + self.s };
        self.s = t;
    }

    fn value(self) -> f64 {
        self.s + self.comp
    }
}

fn mean_of(xs: impl Iterator<Item = f64>) -> (f64, usize) {
    let mut s = Sum::default();
    let mut n = 0;
    for x in xs {
        s.add(x);
        n += 1;
    }
    (s.value() / n as f64, n)
}

/// Empirical moments of the MI pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCResult {
    pub n_samples: usize,
    pub seed: u64,
    /// (Ī₁, Ī₂) estimates.
    pub mean: [f64; 2],
    /// Unbiased sample covariance.
    pub cov: Cov2,
    /// Standard errors of the two means.
    pub stderr: [f64; 2],
    /// Mean and standard error of I = I₁ − I₂.
    pub mi_mean: f64,
    pub mi_stderr: f64,
    /// Standard errors of the covariance entries.
    pub cov_stderr: Cov2,
    #[serde(skip)]
    pub samples: Option<Vec<[f64; 2]>>,
}

impl MCResult {
    pub fn from_samples(samples: Vec<[f64; 2]>, seed: u64) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return param(format!("need at least 2 samples, got {n}"));
        }
        let nf = n as f64;
        let mean = [mean_of(samples.iter().map(|s| s[0])).0, mean_of(samples.iter().map(|s| s[1])).0];
        let centred = |s: &[f64; 2], i: usize| s[i] - mean[i];
        let mut cov = [[0.0; 2]; 2];
        let mut cov_stderr = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in i..2 {
                let prods: Vec<f64> = samples.iter().map(|s| centred(s, i) * centred(s, j)).collect();
                let mut acc = Sum::default();
                prods.iter().for_each(|x| acc.add(*x));
                let cij = acc.value() / (nf - 1.0);
                let biased = acc.value() / nf;
                let mut spread = Sum::default();
                prods.iter().for_each(|x| spread.add((x - biased).powi(2)));
                let se = (spread.value() / (nf - 1.0) / nf).sqrt();
                cov[i][j] = cij;
                cov[j][i] = cij;
                cov_stderr[i][j] = se;
                cov_stderr[j][i] = se;
            }
        }
        let mi_mean = mean[0] - mean[1];
        let mi_var = cov[0][0] + cov[1][1] - 2.0 * cov[0][1];
        Ok(Self {
            n_samples: n,
            seed,
            mean,
            cov,
            stderr: [(cov[0][0] / nf).sqrt(), (cov[1][1] / nf).sqrt()],
            mi_mean,
            mi_stderr: (mi_var.max(0.0) / nf).sqrt(),
            cov_stderr,
            samples: Some(samples),
        })
    }

    /// Raw draws as CSV with header `sample,I1,I2`.
    pub fn raw_csv(&self) -> Option<String> {
        let samples = self.samples.as_ref()?;
        Some(csv_table(
            &["sample", "I1", "I2"],
            samples.iter().enumerate().map(|(i, s)| vec![i.to_string(), fmt_num(s[0]), fmt_num(s[1])]),
        ))
    }
}

/// Runs `f` on a pool of `workers` threads (0 = rayon's default).
pub(crate) fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Per-index values in index order; the first failing index wins.
fn par_indexed<T: Send>(count: usize, workers: usize, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let results: Vec<Result<T>> =
        with_workers(workers, || (0..count as u64).into_par_iter().map(&f).collect())?;
    results.into_iter().collect()
}

pub fn run_mc(corr: &CorrelationSet, p: &SystemParams, n_samples: usize, seed: u64, workers: usize) -> Result<MCResult> {
    p.validate()?;
    corr.check_dims(p)?;
    if n_samples < 2 {
        return param(format!("need at least 2 samples, got {n_samples}"));
    }
    let sampler = ChannelSampler::new(corr)?;
    let samples = par_indexed(n_samples, workers, |i| {
        let ch = sampler.sample(seed, i);
        mi_pair(&ch, p).map(|(a, b)| [a, b]).map_err(|e| match e {
            Error::Numerical(msg) => Error::Numerical(format!("sample {i}: {msg}")),
            other => other,
        })
    })?;
    MCResult::from_samples(samples, seed)
}

/// Sorted d_j² = (m_j − m̄)ᵀV⁻¹(m_j − m̄), with m̄ the deterministic mean pair.
pub fn mahalanobis_sq(mc: &MCResult, gm: &GaussianModel) -> Result<Vec<f64>> {
    let Some(samples) = &mc.samples else {
        return param("Mahalanobis distances need the raw samples");
    };
    let w = gm.inverse_v()?;
    let mut d2: Vec<f64> = samples
        .iter()
        .map(|s| {
            let (a, b) = (s[0] - gm.mean_i1, s[1] - gm.mean_i2);
            w[0][0] * a * a + 2.0 * w[0][1] * a * b + w[1][1] * b * b
        })
        .collect();
    d2.sort_by(f64::total_cmp);
    Ok(d2)
}

pub fn chi2_2_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-0.5 * x).exp_m1()
    }
}

pub fn chi2_2_quantile(p: f64) -> f64 {
    -2.0 * (-p).ln_1p()
}

/// Kolmogorov–Smirnov distance between sorted values and the χ²₂ law.
pub fn ks_chi2_2(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |acc, (i, &x)| {
        let f = chi2_2_cdf(x);
        acc.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// `d2,chi2_quantile` pairs at plotting positions (j − ½)/n.
pub fn mahalanobis_csv(sorted: &[f64]) -> String {
    let n = sorted.len() as f64;
    csv_table(
        &["d2", "chi2_quantile"],
        sorted.iter().enumerate().map(|(j, d)| vec![fmt_num(*d), fmt_num(chi2_2_quantile((j as f64 + 0.5) / n))]),
    )
}

/// Normalized density histogram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `n_bins + 1` ascending edges.
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl Histogram {
    /// Bins `values`; `range` defaults to [0, 1.05·max]. Values within a
    /// rounding margin of the range are clamped into the end bins, values
    /// further out only reduce the mass.
    pub fn from_values(values: &[f64], n_bins: usize, range: Option<(f64, f64)>) -> Result<Self> {
        if n_bins == 0 {
            return param("histogram needs at least one bin");
        }
        if values.is_empty() {
            return param("histogram needs at least one value");
        }
        let (lo, hi) = match range {
            Some((lo, hi)) if lo < hi => (lo, hi),
            Some((lo, hi)) => return param(format!("empty histogram range [{lo}, {hi}]")),
            None => {
                let max = values.iter().copied().fold(0.0, f64::max);
                (0.0, if max > 0.0 { 1.05 * max } else { 1.0 })
            }
        };
        let width = (hi - lo) / n_bins as f64;
        let margin = 1e-9 * (hi - lo);
        let mut counts = vec![0usize; n_bins];
        for &v in values {
            if v < lo - margin || v > hi + margin {
                continue;
            }
            let k = (((v - lo) / width).floor().max(0.0) as usize).min(n_bins - 1);
            counts[k] += 1;
        }
        let total = values.len() as f64;
        Ok(Self {
            edges: (0..=n_bins).map(|k| lo + k as f64 * width).collect(),
            density: counts.iter().map(|&k| k as f64 / (total * width)).collect(),
        })
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.width()
    }

    /// Overlay CSV with header `x,f_emp` at bin centres.
    pub fn to_csv(&self) -> String {
        csv_table(
            &["x", "f_emp"],
            self.centers().into_iter().zip(&self.density).map(|(x, f)| vec![fmt_num(x), fmt_num(*f)]),
        )
    }
}

/// Eigenvalues of B for one draw, ascending.
pub fn esd_eigenvalues(ch: &ChannelSample, s_bar: f64) -> Vec<f64> {
    herm_eigenvalues(&b_matrix(ch, s_bar))
}

pub const DEFAULT_BINS: usize = 100;

pub fn empirical_esd(ch: &ChannelSample, s_bar: f64, n_bins: usize, range: Option<(f64, f64)>) -> Result<Histogram> {
    Histogram::from_values(&esd_eigenvalues(ch, s_bar), n_bins, range)
}

/// ESD pooled over `n_samples` independent draws.
pub fn averaged_esd(
    corr: &CorrelationSet,
    s_bar: f64,
    n_samples: usize,
    seed: u64,
    n_bins: usize,
    range: Option<(f64, f64)>,
    workers: usize,
) -> Result<Histogram> {
    if n_samples == 0 {
        return param("averaged ESD needs at least one sample");
    }
    let sampler = ChannelSampler::new(corr)?;
    let eig = par_indexed(n_samples, workers, |i| Ok(esd_eigenvalues(&sampler.sample(seed, i), s_bar)))?;
    Histogram::from_values(&eig.concat(), n_bins, range)
}

/// Least-squares line through (ln x, ln y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return param("log-log fit needs at least two paired points");
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return param("log-log fit needs positive data");
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return param("log-log fit needs distinct abscissae");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(LogLogFit { slope, intercept: my - slope * mx, points: lx.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub mc_mean: f64,
    pub theory_mean: f64,
    /// |E_MC[I] − Ī| and its standard error.
    pub mean_error: f64,
    pub mean_se: f64,
    pub mean_reliable: bool,
    /// ‖Cov_MC − V‖_F and the Frobenius norm of the entry standard errors.
    pub cov_error: f64,
    pub cov_se: f64,
    pub cov_reliable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub points: Vec<ConvergencePoint>,
    /// None when fewer than two points are reliable.
    pub mean_fit: Option<LogLogFit>,
    pub cov_fit: Option<LogLogFit>,
}

/// Error-versus-dimension regression under proportional scaling N = L = M.
/// A point whose standard error exceeds half its gap is flagged and left out
/// of the fit.
pub fn convergence_study(
    family: &dyn Fn(usize) -> Result<CorrelationSet>,
    p: &SystemParams,
    dims: &[usize],
    n_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<ConvergenceStudy> {
    if dims.len() < 3 {
        return param(format!("convergence study needs at least 3 dimensions, got {}", dims.len()));
    }
    let mut points = Vec::with_capacity(dims.len());
    for &n in dims {
        let pn = SystemParams::new(n, n, n, p.s_bar, p.s_under, p.z)?;
        let corr = family(n)?;
        let gm = analyze(&corr, &pn, &SolverOptions::default())?.model;
        let mc = run_mc(&corr, &pn, n_samples, seed, workers)?;
        let mean_error = (mc.mi_mean - gm.mean_mi()).abs();
        let mut cov_error = 0.0;
        let mut cov_se = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                cov_error += (mc.cov[i][j] - gm.v[i][j]).powi(2);
                cov_se += mc.cov_stderr[i][j].powi(2);
            }
        }
        let (cov_error, cov_se) = (cov_error.sqrt(), cov_se.sqrt());
        points.push(ConvergencePoint {
            n,
            mc_mean: mc.mi_mean,
            theory_mean: gm.mean_mi(),
            mean_error,
            mean_se: mc.mi_stderr,
            mean_reliable: mc.mi_stderr <= 0.5 * mean_error,
            cov_error,
            cov_se,
            cov_reliable: cov_se <= 0.5 * cov_error,
        });
    }
    let fit = |pick: fn(&ConvergencePoint) -> Option<f64>| {
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            points.iter().filter_map(|pt| pick(pt).map(|y| (pt.n as f64, y))).unzip();
        if xs.len() < 2 {
            Ok(None)
        } else {
            fit_loglog(&xs, &ys).map(Some)
        }
    };
    let mean_fit = fit(|pt| pt.mean_reliable.then_some(pt.mean_error))?;
    let cov_fit = fit(|pt| pt.cov_reliable.then_some(pt.cov_error))?;
    Ok(ConvergenceStudy { points, mean_fit, cov_fit })
}
