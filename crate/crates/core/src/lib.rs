//! Deterministic equivalents, CLT covariance and outage analysis for the
//! mutual information of two-hop (relay / active-IRS) MIMO channels, with a
//! Monte Carlo oracle and spectral-density tools.
//!
//! All mutual-information values are in nats.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod deterministic;
pub mod fixed_point;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod output;
pub mod spectrum;

pub use deterministic::{analyze, Analysis, Cov2, DetMatrices, Functionals, GaussianModel};
pub use error::{Error, Result};
pub use fixed_point::{
    ComplexOptions, ComplexSolutionS1, IidParams, Kernel, SolutionBounds, SolutionS1, SolutionS2, SolverOptions,
};
pub use model::{
    assumption_report, build_correlation, psd_sqrt, reduce_raw_spec, AssumptionReport, CorrelationSet, HermitianPsd,
    RawChannelSpec, SystemParams,
};
pub use montecarlo::{ChannelSample, Histogram, MCResult};
pub use spectrum::SpectralDensity;
