//! Single-pass tracking of one-step residual mean and variance.

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Recursive residual statistics: count, running mean and sum of squares.
///
/// Each push applies
/// `Δ = ε − μ̂ₙ₋₁`, `μ̂ₙ = μ̂ₙ₋₁ + Δ/n`, `Mₙ = Mₙ₋₁ + (ε − μ̂ₙ₋₁)(ε − μ̂ₙ)`,
/// starting from `μ̂₀ = 0`, `M₀ = 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ErrorTracker {
    n: u64,
    mean: f64,
    m2: f64,
}

impl ErrorTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, eps: f64) {
        self.n += 1;
        let delta = eps - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (eps - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.m2
    }

    /// Unbiased residual variance `M / (n − 1)`.
    pub fn variance(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: self.n as usize });
        }
        Ok(self.m2 / (self.n - 1) as f64)
    }
}

impl Extend<f64> for ErrorTracker {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        iter.into_iter().for_each(|e| self.push(e));
    }
}
