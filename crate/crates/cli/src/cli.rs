//! Argument parsing and dispatch.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::commands::{self, IidRequest, McRequest, Output, SpectrumRequest, SweepParam};
use crate::config::{RunConfig, Setup};
use crate::error::{usage, CliError};
use crate::report::{Format, Units};

#[derive(Debug, Parser)]
#[command(name = "twohop", version, about = "Mutual-information analysis of two-hop MIMO channels")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the main report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Overrides the configured units.
    #[arg(long, global = true, value_enum)]
    pub units: Option<Units>,
    /// Overrides mc.seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides mc.workers.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed points, residuals and trace functionals.
    Solve,
    /// Means, covariance and optional outage quantities.
    Analyze {
        /// Rate threshold for the outage probability (output units).
        #[arg(long)]
        rate: Option<f64>,
        /// Outage probability for the outage rate.
        #[arg(long)]
        outage: Option<f64>,
    },
    /// Monte Carlo estimates next to the deterministic values.
    Mc {
        /// Overrides mc.samples.
        #[arg(long)]
        samples: Option<usize>,
        /// Raw draws as CSV (`sample,I1,I2`).
        #[arg(long)]
        raw: Option<PathBuf>,
        /// Sorted Mahalanobis distances as CSV (`d2,chi2_quantile`).
        #[arg(long)]
        mahalanobis: Option<PathBuf>,
    },
    /// Limiting spectral density of B = H₁H₂H₂ᴴH₁ᴴ + s̄H₁H₁ᴴ.
    Spectrum {
        #[arg(long, default_value_t = twohop_core::spectrum::DEFAULT_POINTS)]
        points: usize,
        /// Inversion offset; defaults to 1e-3 of the support scale.
        #[arg(long)]
        y: Option<f64>,
        /// Right end of the grid; defaults to 1.2 times the support scale.
        #[arg(long)]
        x_max: Option<f64>,
        /// Averaged empirical ESD overlay as CSV (`x,f_emp`).
        #[arg(long)]
        empirical: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        esd_samples: usize,
        #[arg(long, default_value_t = twohop_core::montecarlo::DEFAULT_BINS)]
        bins: usize,
    },
    /// Re-analyzes over a grid of SNR (dB), L or N values.
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
    },
    /// Closed forms for identity correlations.
    Iid {
        #[arg(long)]
        c1: f64,
        #[arg(long)]
        c2: f64,
        #[arg(long)]
        sigma1_sq: f64,
        #[arg(long)]
        sigma2_sq: f64,
        /// Number of receive antennas N (means scale linearly in N).
        #[arg(long, default_value_t = 1.0)]
        n: f64,
        /// Also evaluate the large-L limit with c = N/M.
        #[arg(long)]
        large_l: Option<f64>,
    },
}

impl Cli {
    fn load(&self) -> Result<(RunConfig, PathBuf), CliError> {
        let Some(path) = &self.config else {
            return usage("this command needs --config <path>");
        };
        let cfg = RunConfig::load(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    fn apply_overrides(&self, s: &mut Setup) {
        if let Some(u) = self.units {
            s.units = u;
        }
        if let Some(seed) = self.seed {
            s.mc.seed = seed;
        }
        if let Some(w) = self.workers {
            s.mc.workers = w;
        }
    }

    fn setup(&self) -> Result<Setup, CliError> {
        let (cfg, base) = self.load()?;
        let mut s = cfg.setup(&base)?;
        self.apply_overrides(&mut s);
        Ok(s)
    }

    /// Runs the command and returns its output without touching the filesystem.
    pub fn execute(&self) -> Result<Output, CliError> {
        let f = self.format;
        match &self.command {
            Command::Solve => commands::cmd_solve(&self.setup()?, f),
            Command::Analyze { rate, outage } => commands::cmd_analyze(&self.setup()?, *rate, *outage, f),
            Command::Mc { samples, raw, mahalanobis } => {
                let mut s = self.setup()?;
                if let Some(k) = samples {
                    s.mc.samples = *k;
                }
                commands::cmd_mc(&s, &McRequest { raw: raw.clone(), mahalanobis: mahalanobis.clone() }, f)
            }
            Command::Spectrum { points, y, x_max, empirical, esd_samples, bins } => {
                let req = SpectrumRequest {
                    points: *points,
                    y: *y,
                    x_max: *x_max,
                    empirical: empirical.clone(),
                    esd_samples: *esd_samples,
                    bins: *bins,
                };
                commands::cmd_spectrum(&self.setup()?, &req, f)
            }
            Command::Sweep { param, values } => {
                let (cfg, base) = self.load()?;
                commands::cmd_sweep(&cfg, &base, &|s| self.apply_overrides(s), *param, values, f)
            }
            Command::Iid { c1, c2, sigma1_sq, sigma2_sq, n, large_l } => {
                let req = IidRequest {
                    c1: *c1,
                    c2: *c2,
                    sigma1_sq: *sigma1_sq,
                    sigma2_sq: *sigma2_sq,
                    n: *n,
                    large_l: *large_l,
                };
                commands::cmd_iid(&req, self.units.unwrap_or_default(), f)
            }
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Executes and emits: report to `--out` or stdout, side files, notes to stderr.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let out = cli.execute()?;
    match &cli.out {
        Some(path) => write(path, &out.text)?,
        None => print!("{}", out.text),
    }
    for (path, text) in &out.files {
        write(path, text)?;
    }
    for note in &out.notes {
        eprintln!("{note}");
    }
    Ok(())
}
