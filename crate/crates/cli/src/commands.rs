//! Command implementations. Each returns the main report plus any side files.

use std::path::PathBuf;

use twohop_core::deterministic::{
    analyze, iid_covariance, iid_deltas, iid_large_l, iid_means, iid_roots, outage_probability, outage_rate,
};
use twohop_core::montecarlo::{averaged_esd, ks_chi2_2, mahalanobis_csv, mahalanobis_sq, run_mc};
use twohop_core::spectrum::{default_grid, default_offset, lsd_density};
use twohop_core::{Analysis, GaussianModel, IidParams};

use crate::config::{Dims, RunConfig, Setup};
use crate::error::{usage, CliError};
use crate::report::{Cell, Format, Table, Units};

/// Main report plus files to write and notes for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub files: Vec<(PathBuf, String)>,
    pub notes: Vec<String>,
}

impl Output {
    fn table(t: &Table, format: Format) -> Self {
        Self { text: t.render(format), files: Vec::new(), notes: Vec::new() }
    }
}

fn named(pairs: Vec<(&str, Cell)>) -> Vec<(String, Cell)> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn model_columns(gm: &GaussianModel, u: Units) -> Vec<(&'static str, Cell)> {
    vec![
        ("mean_i1", u.info(gm.mean_i1).into()),
        ("mean_i2", u.info(gm.mean_i2).into()),
        ("mean_mi", u.info(gm.mean_mi()).into()),
        ("v11", u.variance(gm.v[0][0]).into()),
        ("v12", u.variance(gm.v[0][1]).into()),
        ("v22", u.variance(gm.v[1][1]).into()),
    ]
}

fn run_analysis(s: &Setup) -> Result<Analysis, CliError> {
    Ok(analyze(&s.corr, &s.params, &s.solver)?)
}

pub fn cmd_solve(s: &Setup, format: Format) -> Result<Output, CliError> {
    let a = run_analysis(s)?;
    let (s1, s2) = (&a.system1, &a.system2);
    let mut pairs = named(vec![
        ("delta", s1.delta.into()),
        ("omega_bar", s1.omega_bar.into()),
        ("omega_under", s1.omega_under.into()),
        ("gamma", s1.gamma.into()),
        ("tau", s2.tau.into()),
        ("tau_bar", s2.tau_bar.into()),
        ("residual1", s1.residual.into()),
        ("residual2", s2.residual.into()),
        ("iterations1", s1.iterations.into()),
        ("inner_iterations1", s1.inner_iterations.into()),
        ("iterations2", s2.iterations.into()),
    ]);
    let functionals = serde_json::to_value(a.functionals).map_err(|e| CliError::Numerical(e.to_string()))?;
    if let serde_json::Value::Object(map) = functionals {
        for (k, v) in map {
            pairs.push((k, Cell::Num(v.as_f64().unwrap_or(f64::NAN))));
        }
    }
    Ok(Output::table(&Table::record(pairs), format))
}

/// `rate` is in the output units; `outage` is a probability.
pub fn cmd_analyze(s: &Setup, rate: Option<f64>, outage: Option<f64>, format: Format) -> Result<Output, CliError> {
    let a = run_analysis(s)?;
    let u = s.units;
    let gm = &a.model;
    let mut pairs = model_columns(gm, u);
    if let Some(r) = rate {
        pairs.push(("rate", r.into()));
        pairs.push(("p_out", outage_probability(gm, u.to_nats(r))?.into()));
    }
    if let Some(p) = outage {
        pairs.push(("outage", p.into()));
        pairs.push(("c_out", u.info(outage_rate(gm, p)?).into()));
    }
    Ok(Output::table(&Table::record(named(pairs)), format))
}

pub struct McRequest {
    pub raw: Option<PathBuf>,
    pub mahalanobis: Option<PathBuf>,
}

pub fn cmd_mc(s: &Setup, req: &McRequest, format: Format) -> Result<Output, CliError> {
    let gm = run_analysis(s)?.model;
    let mc = run_mc(&s.corr, &s.params, s.mc.samples, s.mc.seed, s.mc.workers)?;
    let u = s.units;
    let mut t = Table::new(&["quantity", "mc", "stderr", "theory"]);
    let info = |name: &str, m: f64, se: f64, th: f64| vec![name.into(), u.info(m).into(), u.info(se).into(), u.info(th).into()];
    t.push(info("I1", mc.mean[0], mc.stderr[0], gm.mean_i1));
    t.push(info("I2", mc.mean[1], mc.stderr[1], gm.mean_i2));
    t.push(info("I", mc.mi_mean, mc.mi_stderr, gm.mean_mi()));
    for (name, i, j) in [("V11", 0, 0), ("V12", 0, 1), ("V22", 1, 1)] {
        t.push(vec![
            name.into(),
            u.variance(mc.cov[i][j]).into(),
            u.variance(mc.cov_stderr[i][j]).into(),
            u.variance(gm.v[i][j]).into(),
        ]);
    }
    let mut out = Output::table(&t, format);
    if let Some(path) = &req.raw {
        let raw = mc.raw_csv().expect("run_mc keeps samples");
        out.files.push((path.clone(), raw));
    }
    if let Some(path) = &req.mahalanobis {
        let d2 = mahalanobis_sq(&mc, &gm)?;
        out.notes.push(format!("KS distance to chi-square(2): {:.4}", ks_chi2_2(&d2)));
        out.files.push((path.clone(), mahalanobis_csv(&d2)));
    }
    Ok(out)
}

pub struct SpectrumRequest {
    pub points: usize,
    pub y: Option<f64>,
    pub x_max: Option<f64>,
    pub empirical: Option<PathBuf>,
    pub esd_samples: usize,
    pub bins: usize,
}

pub fn cmd_spectrum(s: &Setup, req: &SpectrumRequest, format: Format) -> Result<Output, CliError> {
    if req.points < 2 {
        return usage("spectrum needs at least 2 grid points");
    }
    let s_bar = s.params.s_bar;
    let grid = match req.x_max {
        Some(hi) if hi > 0.0 => (0..req.points).map(|k| hi * k as f64 / (req.points - 1) as f64).collect(),
        Some(hi) => return usage(format!("--x-max must be positive, got {hi}")),
        None => default_grid(&s.corr, s_bar, req.points),
    };
    let y = req.y.unwrap_or_else(|| default_offset(&s.corr, s_bar));
    let d = lsd_density(&s.corr, s_bar, &grid, y)?;
    let text = match format {
        Format::Csv => d.to_csv(),
        Format::Json => {
            let mut v = serde_json::to_string_pretty(&d).map_err(|e| CliError::Numerical(e.to_string()))?;
            v.push('\n');
            v
        }
    };
    let mut out = Output { text, files: Vec::new(), notes: Vec::new() };
    out.notes.push(format!("mass {:.6}, zero atom {:.6}, offset y {:e}", d.mass, d.zero_atom, y));
    if !d.interpolated.is_empty() {
        out.notes.push(format!("{} grid points interpolated after solver failure", d.interpolated.len()));
    }
    if let Some(path) = &req.empirical {
        let hi = *grid.last().expect("nonempty grid");
        let h = averaged_esd(&s.corr, s_bar, req.esd_samples, s.mc.seed, req.bins, Some((0.0, hi)), s.mc.workers)?;
        out.notes.push(format!("L1 distance to empirical ESD: {:.4}", d.l1_distance(&h)));
        out.files.push((path.clone(), h.to_csv()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    Snr,
    L,
    N,
}

impl SweepParam {
    fn column(self) -> &'static str {
        match self {
            SweepParam::Snr => "snr_db",
            SweepParam::L => "l",
            SweepParam::N => "n",
        }
    }
}

/// One row per value; failed points become NA rows and are counted in the notes.
pub fn cmd_sweep(
    cfg: &RunConfig,
    base: &std::path::Path,
    overrides: &dyn Fn(&mut Setup),
    param: SweepParam,
    values: &[f64],
    format: Format,
) -> Result<Output, CliError> {
    if values.is_empty() {
        return usage("sweep needs at least one value");
    }
    if param != SweepParam::Snr {
        if !cfg.correlation.resizable() {
            return usage("dimension sweeps need identity or model correlation sources");
        }
        if let Some(v) = values.iter().find(|v| !(v.fract() == 0.0 && **v >= 1.0)) {
            return usage(format!("dimension values must be positive integers, got {v}"));
        }
    }
    let mut t = Table::new(&[param.column(), "mean_i1", "mean_i2", "mean_mi", "v11", "v12", "v22"]);
    let mut failures = Vec::new();
    for &v in values {
        let point = match param {
            SweepParam::Snr => cfg.with_snr_db(v),
            SweepParam::L => cfg.with_dims(Dims { l: v as usize, ..cfg.dims }),
            SweepParam::N => cfg.with_dims(Dims { n: v as usize, ..cfg.dims }),
        };
        let result = point.setup(base).and_then(|mut s| {
            overrides(&mut s);
            run_analysis(&s).map(|a| (a, s.units))
        });
        let key: Cell = if param == SweepParam::Snr { v.into() } else { (v as usize).into() };
        match result {
            Ok((a, u)) => {
                let mut row = vec![key];
                row.extend(model_columns(&a.model, u).into_iter().map(|(_, c)| c));
                t.push(row);
            }
            Err(e) => {
                failures.push(format!("{} = {v}: {e}", param.column()));
                let mut row = vec![key];
                row.extend(std::iter::repeat_n(Cell::Num(f64::NAN), 6));
                t.push(row);
            }
        }
    }
    let mut out = Output::table(&t, format);
    if !failures.is_empty() {
        out.notes.push(format!("warning: {} of {} sweep points failed", failures.len(), values.len()));
        out.notes.extend(failures);
    }
    Ok(out)
}

pub struct IidRequest {
    pub c1: f64,
    pub c2: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub n: f64,
    pub large_l: Option<f64>,
}

pub fn cmd_iid(req: &IidRequest, units: Units, format: Format) -> Result<Output, CliError> {
    if !(req.n > 0.0) {
        return usage(format!("--n must be positive, got {}", req.n));
    }
    let iid = IidParams::new(req.c1, req.c2)?;
    let (s1, s2) = (req.sigma1_sq, req.sigma2_sq);
    let (mf, mg) = iid_roots(&iid, s1, s2)?;
    // Means scale linearly in N for fixed ratios; evaluate per antenna and rescale.
    let (i1, i2) = iid_means(&iid, 1, s1, s2)?;
    let (i1, i2) = (req.n * i1, req.n * i2);
    let (dv1, dv2, dc) = iid_deltas(&iid, s1, s2)?;
    let v = iid_covariance(&iid, s1, s2)?;
    let u = units;
    let mut pairs = vec![
        ("c1", req.c1.into()),
        ("c2", req.c2.into()),
        ("sigma1_sq", s1.into()),
        ("sigma2_sq", s2.into()),
        ("n", req.n.into()),
        ("m_f", mf.into()),
        ("m_g", mg.into()),
        ("mean_i1", u.info(i1).into()),
        ("mean_i2", u.info(i2).into()),
        ("mean_mi", u.info(i1 - i2).into()),
        ("delta_v1", dv1.into()),
        ("delta_v2", dv2.into()),
        ("delta_c", dc.into()),
        ("v11", u.variance(v[0][0]).into()),
        ("v12", u.variance(v[0][1]).into()),
        ("v22", u.variance(v[1][1]).into()),
    ];
    if let Some(c) = req.large_l {
        let lim = iid_large_l(c, req.n, s1, s2)?;
        pairs.extend([
            ("large_l_c", c.into()),
            ("large_l_m", lim.m.into()),
            ("large_l_mean_mi", u.info(lim.mean).into()),
            ("large_l_delta_v1", lim.delta_v1.into()),
            ("large_l_variance", u.variance(lim.variance).into()),
        ]);
    }
    Ok(Output::table(&Table::record(named(pairs)), format))
}
