//! Shared fixtures for the benchmarks.

use twohop_core::model::build_correlation;
use twohop_core::{CorrelationSet, HermitianPsd, SystemParams};

/// Angular-spread correlation at both ends, identities in the middle.
pub fn correlated(n: usize, l: usize, m: usize) -> CorrelationSet {
    CorrelationSet::new(
        build_correlation(10.0, 5.0, 0.5, n).expect("valid angles"),
        HermitianPsd::identity(l),
        HermitianPsd::identity(l),
        build_correlation(20.0, 10.0, 0.5, m).expect("valid angles"),
    )
    .expect("consistent dims")
}

pub fn params(n: usize, l: usize, m: usize) -> SystemParams {
    SystemParams::new(n, l, m, 0.5, 0.5, 0.5).expect("valid params")
}
