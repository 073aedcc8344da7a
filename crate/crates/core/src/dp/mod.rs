//! Differential privacy primitives: Laplace noise, budget accounting, the
//! binary-tree private CDF mechanism and quantile estimation on top of it,
//! and the Lambert-W / privacy-resolution utilities.
//!
//! All mechanisms accept `eps = f64::INFINITY` as a sentinel that disables
//! noise entirely, which makes pipelines deterministic for testing.

mod cdf;
mod lambert;

pub use cdf::{isotonic_nondecreasing, private_cdf, private_quantiles};
pub use lambert::{kappa, lambert_w};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// An (ε, δ) privacy budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::param(format!("delta must be in [0,1], got {delta}")));
        }
        Ok(PrivacyParams { epsilon, delta })
    }

    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }
}

/// One recorded mechanism invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub mechanism: String,
    pub epsilon: f64,
    pub delta: f64,
}

/// Budget accounting across mechanism invocations, totalled by basic
/// composition: total ε = Σ ε_i, total δ = Σ δ_i.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PrivacyLedger {
    entries: Vec<LedgerEntry>,
}

impl PrivacyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, mechanism: impl Into<String>, epsilon: f64, delta: f64) {
        self.entries.push(LedgerEntry { mechanism: mechanism.into(), epsilon, delta });
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn total_epsilon(&self) -> f64 {
        self.entries.iter().map(|e| e.epsilon).sum()
    }

    pub fn total_delta(&self) -> f64 {
        self.entries.iter().map(|e| e.delta).sum()
    }
}

/// One draw from `Lap(scale)`, density `(1/2s)·e^{−|x|/s}`.
pub fn laplace_noise(scale: f64, rng: &mut Rng) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::param(format!("laplace scale must be positive, got {scale}")));
    }
    Ok(rng.laplace(scale))
}
