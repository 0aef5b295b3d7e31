//! Evolving Takagi–Sugeno prognostics on `alloc` only.
//!
//! The crate learns a fuzzy degradation model one sample at a time
//! ([`evolve::learn_step`]), tracks its prequential one-step residuals
//! ([`ErrorTracker`]), iterates the model over long horizons while
//! propagating the residual variance analytically ([`prognosis::forecast`]),
//! and turns the resulting bands into RUL point estimates and bounds
//! ([`prognosis::estimate_rul`]). An ARMA baseline, the lag-tuning protocol
//! and the RA/MAPE scoring used to evaluate them live alongside.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the textbook triangular-solve formulas.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod arma;
pub mod dist;
pub mod error;
pub mod evolve;
pub mod linalg;
pub mod metrics;
pub mod prognoser;
pub mod prognosis;
pub mod series;
pub mod tracker;
pub mod tuning;
pub mod ts;

pub use error::{Error, Result};
pub use evolve::{learn_step, Action, EvolveConfig, LearnReport, Preset};
pub use linalg::Matrix;
pub use prognosis::{Direction, ForecastPath, RulEstimate};
pub use tracker::ErrorTracker;
pub use ts::{FuzzyRule, TsModel};
pub use prognoser::{ArmaPrognoser, EfsPrognoser, Prognoser, Prognosis};
pub use series::DegradationSeries;
