//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twohop_core::model::matrix_io::{read_general_matrix, read_matrix};
use twohop_core::model::power::PowerModel;
use twohop_core::{
    build_correlation, reduce_raw_spec, CorrelationSet, HermitianPsd, RawChannelSpec, SolverOptions, SystemParams,
};

use crate::error::{usage, CliError};
use crate::report::Units;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dims: Dims,
    /// Noise powers given directly. Exclusive with `snr_db`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<Noise>,
    /// SNR ρ = P_T/σ² in dB, mapped to noise powers through `power`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerModel>,
    #[serde(default)]
    pub correlation: CorrelationConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub units: Units,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    pub n: usize,
    pub l: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    pub sigma1_sq_bar: f64,
    pub sigma1_sq_under: f64,
    pub sigma2_sq: f64,
}

/// Source of one correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSource {
    Identity,
    Model { eta_deg: f64, delta_c_deg: f64, d_s: f64 },
    File { path: PathBuf },
}

/// File paths of a raw physical channel description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFiles {
    #[serde(rename = "A1")]
    pub a1: PathBuf,
    #[serde(rename = "B1")]
    pub b1: PathBuf,
    #[serde(rename = "A2")]
    pub a2: PathBuf,
    #[serde(rename = "B2")]
    pub b2: PathBuf,
    #[serde(rename = "Phi")]
    pub phi: PathBuf,
    #[serde(rename = "P")]
    pub p: PathBuf,
}

/// Per-matrix sources (missing ones are identities) or one raw description.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<MatrixSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<MatrixSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<MatrixSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<MatrixSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<RawFiles>,
}

impl CorrelationConfig {
    fn per_matrix(&self) -> [(&'static str, &Option<MatrixSource>); 4] {
        [("r1", &self.r1), ("t1", &self.t1), ("r2", &self.r2), ("t2", &self.t2)]
    }

    /// True when every matrix can be rebuilt at any dimension.
    pub fn resizable(&self) -> bool {
        self.raw.is_none() && self.per_matrix().iter().all(|(_, s)| !matches!(s, Some(MatrixSource::File { .. })))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// Worker threads; 0 picks the number of cores.
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { samples: 10_000, seed: 0, workers: 0 }
    }
}

/// Everything a command needs, resolved from a configuration.
#[derive(Debug, Clone)]
pub struct Setup {
    pub corr: CorrelationSet,
    pub params: SystemParams,
    pub solver: SolverOptions,
    pub mc: McConfig,
    pub units: Units,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de)
            .map_err(|e| CliError::Usage(format!("config: at `{}`: {}", e.path(), e.inner())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let Dims { n, l, m } = self.dims;
        if n == 0 || l == 0 || m == 0 {
            return usage("config: dims must be positive");
        }
        match (&self.noise, self.snr_db) {
            (Some(_), Some(_)) => return usage("config: give either `noise` or `snr_db`, not both"),
            (None, None) => return usage("config: one of `noise` or `snr_db` is required"),
            (Some(nz), None) => {
                if !(nz.sigma2_sq > 0.0) {
                    return usage("config: noise.sigma2_sq must be positive");
                }
                if !(nz.sigma1_sq_bar >= 0.0 && nz.sigma1_sq_under >= 0.0) {
                    return usage("config: relay noise powers must be nonnegative");
                }
            }
            (None, Some(snr)) => {
                if !snr.is_finite() {
                    return usage("config: snr_db must be finite");
                }
            }
        }
        if let (Some(_), Some(_)) = (&self.noise, &self.power) {
            return usage("config: `power` only applies together with `snr_db`");
        }
        let c = &self.correlation;
        if c.raw.is_some() {
            if let Some((name, _)) = c.per_matrix().iter().find(|(_, s)| s.is_some()) {
                return usage(format!("config: correlation.{name} conflicts with correlation.raw"));
            }
        }
        Ok(())
    }

    fn power_model(&self) -> PowerModel {
        self.power.unwrap_or_default()
    }

    /// Transmit power used to map an SNR to σ₂².
    pub fn p_t(&self) -> f64 {
        self.power_model().p_t
    }

    /// Copy at new dimensions.
    pub fn with_dims(&self, dims: Dims) -> Self {
        Self { dims, ..self.clone() }
    }

    /// Copy at SNR ρ (dB): sets `snr_db` in power mode, otherwise σ₂² = P_T/ρ.
    pub fn with_snr_db(&self, snr_db: f64) -> Self {
        let mut out = self.clone();
        match &mut out.noise {
            Some(nz) => nz.sigma2_sq = self.p_t() / 10f64.powf(snr_db / 10.0),
            None => out.snr_db = Some(snr_db),
        }
        out
    }

    /// Resolves matrices and parameters; relative paths are taken from `base`.
    pub fn setup(&self, base: &Path) -> Result<Setup, CliError> {
        self.validate()?;
        let Dims { n, l, m } = self.dims;
        let corr = self.correlation_set(base)?;
        let (corr, params) = match (&self.noise, self.snr_db) {
            (Some(nz), _) => (corr, SystemParams::new(n, l, m, nz.sigma1_sq_bar, nz.sigma1_sq_under, nz.sigma2_sq)?),
            (None, Some(snr)) => {
                let pm = self.power_model();
                (pm.scale(&corr)?, pm.params(n, l, m, snr)?)
            }
            (None, None) => unreachable!("validated"),
        };
        corr.check_dims(&params)?;
        Ok(Setup { corr, params, solver: self.solver, mc: self.mc, units: self.units })
    }

    fn correlation_set(&self, base: &Path) -> Result<CorrelationSet, CliError> {
        let c = &self.correlation;
        let Dims { n, l, m } = self.dims;
        if let Some(raw) = &c.raw {
            let read = |p: &PathBuf| read_general_matrix(&base.join(p));
            let spec = RawChannelSpec {
                a1: read(&raw.a1)?,
                b1: read(&raw.b1)?,
                a2: read(&raw.a2)?,
                b2: read(&raw.b2)?,
                phi: read(&raw.phi)?,
                p: read(&raw.p)?,
            };
            return Ok(reduce_raw_spec(&spec)?);
        }
        let build = |name: &str, src: &Option<MatrixSource>, dim: usize| -> Result<HermitianPsd, CliError> {
            let h = match src {
                None | Some(MatrixSource::Identity) => HermitianPsd::identity(dim),
                Some(MatrixSource::Model { eta_deg, delta_c_deg, d_s }) => {
                    build_correlation(*eta_deg, *delta_c_deg, *d_s, dim)?
                }
                Some(MatrixSource::File { path }) => HermitianPsd::with_clamped_mass(read_matrix(&base.join(path))?)?.0,
            };
            if h.dim() != dim {
                return usage(format!("config: correlation.{name} is {}×{0}, expected {dim}×{dim}", h.dim()));
            }
            Ok(h)
        };
        Ok(CorrelationSet::new(
            build("r1", &c.r1, n)?,
            build("t1", &c.t1, l)?,
            build("r2", &c.r2, l)?,
            build("t2", &c.t2, m)?,
        )?)
    }
}
