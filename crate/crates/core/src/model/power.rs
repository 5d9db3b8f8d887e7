//! Scalar power bookkeeping for an active-IRS / AF-relay link.
//!
//! Physical link: y = G₁(aG₂x + n₁) + n₂ with per-hop path gain β, transmit
//! power P_T, amplification budget P_A spread over the L elements and element
//! noise n₁ added after amplification. Pulling `a` in front gives the
//! normalized model with T₁ = (P_A/P_T)·I, T₂ = βP_T·I, relay-side noise
//! s = σ²/a² = σ²LβP_T/P_A and receiver noise z = σ².

use serde::{Deserialize, Serialize};

use super::{CorrelationSet, HermitianPsd, SystemParams};
use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    /// Transmit power P_T (W).
    pub p_t: f64,
    /// Total amplification power P_A (W).
    pub p_a: f64,
    /// Per-hop path loss (dB).
    pub path_loss_db: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self { p_t: 1.0, p_a: 0.5, path_loss_db: 40.0 }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_t > 0.0 && self.p_a > 0.0 && self.path_loss_db.is_finite()) {
            return param("power model needs P_T > 0, P_A > 0 and a finite path loss");
        }
        Ok(())
    }

    /// Linear per-hop gain β.
    pub fn beta(&self) -> f64 {
        10f64.powf(-self.path_loss_db / 10.0)
    }

    /// Noise power σ² for ρ = P_T/σ² given in dB.
    pub fn noise_from_snr_db(&self, snr_db: f64) -> f64 {
        self.p_t / 10f64.powf(snr_db / 10.0)
    }

    /// Per-element amplitude gain squared, a² = P_A/(LβP_T).
    pub fn amplification_sq(&self, l: usize) -> f64 {
        self.p_a / (l as f64 * self.beta() * self.p_t)
    }

    /// Scale applied to T₁ and to T₂.
    pub fn gains(&self) -> (f64, f64) {
        (self.p_a / self.p_t, self.beta() * self.p_t)
    }

    /// Normalized parameters at SNR ρ (dB); relay and receiver noise share σ².
    pub fn params(&self, n: usize, l: usize, m: usize, snr_db: f64) -> Result<SystemParams> {
        self.validate()?;
        let sigma2 = self.noise_from_snr_db(snr_db);
        let s = sigma2 / self.amplification_sq(l);
        SystemParams::new(n, l, m, s, s, sigma2)
    }

    /// Applies the hop gains to a set of (unit-power) correlation matrices.
    pub fn scale(&self, corr: &CorrelationSet) -> Result<CorrelationSet> {
        let (g1, g2) = self.gains();
        CorrelationSet::new(corr.r1.clone(), corr.t1.scaled(g1)?, corr.r2.clone(), corr.t2.scaled(g2)?)
    }

    pub fn identity_set(&self, n: usize, l: usize, m: usize) -> CorrelationSet {
        let (g1, g2) = self.gains();
        let scaled = |d: usize, g: f64| HermitianPsd::identity(d).scaled(g).expect("positive gain");
        CorrelationSet {
            r1: HermitianPsd::identity(n),
            t1: scaled(l, g1),
            r2: HermitianPsd::identity(l),
            t2: scaled(m, g2),
        }
    }
}
