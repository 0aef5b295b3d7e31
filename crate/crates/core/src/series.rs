//! Per-cycle health-index series of one unit.

use alloc::string::String;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prognosis::Direction;

/// Default fault threshold: 70 % of rated capacity.
pub const DEFAULT_ETA: f64 = 70.0;

/// Health index per cycle with its fault threshold.
///
/// `cycles` are strictly increasing; `hi[i]` belongs to `cycles[i]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DegradationSeries {
    battery_id: String,
    cycles: Vec<u32>,
    hi: Vec<f64>,
    eta: f64,
    failure_cycle: Option<u32>,
}

impl DegradationSeries {
    pub fn new(battery_id: impl Into<String>, cycles: Vec<u32>, hi: Vec<f64>, eta: f64) -> Result<Self> {
        if cycles.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: cycles.len(), got: hi.len() });
        }
        if hi.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if !eta.is_finite() || hi.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if cycles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("cycles must be strictly increasing"));
        }
        let direction = Direction::from_start(hi[0], eta);
        let failure_cycle = hi
            .iter()
            .position(|&v| direction.crossed(v, eta))
            .map(|i| cycles[i]);
        Ok(Self { battery_id: battery_id.into(), cycles, hi, eta, failure_cycle })
    }

    /// Series with cycles numbered `1..=hi.len()`.
    pub fn from_hi(battery_id: impl Into<String>, hi: Vec<f64>, eta: f64) -> Result<Self> {
        let cycles = (1..=hi.len() as u32).collect();
        Self::new(battery_id, cycles, hi, eta)
    }

    pub fn battery_id(&self) -> &str {
        &self.battery_id
    }

    pub fn cycles(&self) -> &[u32] {
        &self.cycles
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn len(&self) -> usize {
        self.hi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hi.is_empty()
    }

    pub fn direction(&self) -> Direction {
        Direction::from_start(self.hi[0], self.eta)
    }

    /// First cycle at which the index reaches the threshold.
    pub fn failure_cycle(&self) -> Option<u32> {
        self.failure_cycle
    }

    /// Position of `cycle` in the series.
    pub fn index_of(&self, cycle: u32) -> Option<usize> {
        self.cycles.binary_search(&cycle).ok()
    }
}
