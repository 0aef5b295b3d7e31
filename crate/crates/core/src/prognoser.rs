//! Uniform "train on history, forecast ahead" interface over the evolving
//! fuzzy learner and the ARMA baseline, used by lag tuning and the α–λ sweep.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::arma::{fit_arma_segments, forecast_arma, ArmaModel};
use crate::error::{Error, Result};
use crate::evolve::{learn_step, Preset};
use crate::prognosis::{estimate_correlations, forecast, ForecastPath};
use crate::tracker::ErrorTracker;
use crate::ts::TsModel;

/// A trained model, kept for inspection and snapshots.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Fitted {
    Efs { model: TsModel, tracker: ErrorTracker },
    Arma { model: ArmaModel },
}

/// Forecast from the end of the unit's observed history.
#[derive(Debug, Clone, PartialEq)]
pub struct Prognosis {
    pub path: ForecastPath,
    pub fitted: Fitted,
    /// Lag correlations came from a zero-variance series and were replaced
    /// by the identity.
    pub degenerate_corr: bool,
}

/// Trains on a run-to-failure training series plus the unit's observed
/// prefix, then forecasts the unit forward.
pub trait Prognoser {
    fn name(&self) -> &str;

    /// `train` is the training unit's full series, `uut` the unit under test
    /// observed so far (its last element is the forecast origin). Rows never
    /// mix samples of the two series.
    fn prognose(&self, train: &[f64], uut: &[f64], lags: usize, max_horizon: usize) -> Result<Prognosis>;
}

/// Evolving Takagi–Sugeno learner with a named hyperparameter preset.
///
/// Series are divided by `scale` before learning (so percentages become
/// ratios, matching the unit-free hyperparameter defaults) and forecasts are
/// scaled back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfsPrognoser {
    pub preset: Preset,
    pub scale: f64,
}

impl EfsPrognoser {
    pub fn new(preset: Preset) -> Self {
        Self { preset, scale: 100.0 }
    }

    /// Streams the lagged rows of `series` through the learner.
    fn learn_series(model: &mut TsModel, tracker: &mut ErrorTracker, series: &[f64]) -> Result<()> {
        let lags = model.n_x();
        let mut x = Vec::with_capacity(lags);
        for t in lags..series.len() {
            x.clear();
            x.extend((1..=lags).map(|i| series[t - i]));
            learn_step(model, &x, series[t], tracker)?;
        }
        Ok(())
    }
}

impl Prognoser for EfsPrognoser {
    fn name(&self) -> &str {
        self.preset.name()
    }

    fn prognose(&self, train: &[f64], uut: &[f64], lags: usize, max_horizon: usize) -> Result<Prognosis> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidParameter("scale must be positive"));
        }
        if uut.len() < lags {
            return Err(Error::HistoryTooShort { needed: lags, got: uut.len() });
        }
        let train: Vec<f64> = train.iter().map(|v| v / self.scale).collect();
        let uut: Vec<f64> = uut.iter().map(|v| v / self.scale).collect();

        let mut model = TsModel::new(lags, self.preset.config(lags))?;
        let mut tracker = ErrorTracker::new();
        Self::learn_series(&mut model, &mut tracker, &train)?;
        Self::learn_series(&mut model, &mut tracker, &uut)?;
        if model.rule_count() == 0 {
            return Err(Error::InsufficientData { needed: lags + 1, got: train.len().max(uut.len()) });
        }
        let sigma_eps2 = tracker.variance()?;

        // Lag correlations from the unit itself when it is long enough,
        // otherwise from the training series.
        let corr_source = if uut.len() >= lags + 2 { &uut } else { &train };
        let corr = estimate_correlations(corr_source, lags)?;
        let path = forecast(&model, &uut, sigma_eps2, &corr.matrix, max_horizon)?.scaled(self.scale);
        Ok(Prognosis { path, fitted: Fitted::Efs { model, tracker }, degenerate_corr: corr.degenerate })
    }
}

/// ARMA(p, q) baseline with `p` equal to the lag count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArmaPrognoser {
    pub q: usize,
}

impl Prognoser for ArmaPrognoser {
    fn name(&self) -> &str {
        "arma"
    }

    fn prognose(&self, train: &[f64], uut: &[f64], lags: usize, max_horizon: usize) -> Result<Prognosis> {
        if uut.len() < lags {
            return Err(Error::HistoryTooShort { needed: lags, got: uut.len() });
        }
        let model = fit_arma_segments(&[train, uut], lags, self.q)?;
        let path = forecast_arma(&model, uut, max_horizon)?;
        Ok(Prognosis { path, fitted: Fitted::Arma { model }, degenerate_corr: false })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_decay(n: usize, start: f64, slope: f64) -> Vec<f64> {
        (0..n).map(|i| start - slope * i as f64).collect()
    }

    #[test]
    fn efs_forecasts_linear_decay() {
        let train = linear_decay(150, 100.0, 0.2);
        let uut = linear_decay(40, 98.0, 0.2);
        let p = EfsPrognoser::new(Preset::Ebets).prognose(&train, &uut, 2, 300).unwrap();
        assert_eq!(p.path.horizon(), 300);
        // Ten steps ahead the trend should be followed closely.
        let expected = 98.0 - 0.2 * 49.0;
        assert!((p.path.means[9] - expected).abs() < 0.5, "{}", p.path.means[9]);
        assert_eq!(p.path.variances[0], p.path.sigma_eps2);
        assert!(matches!(p.fitted, Fitted::Efs { .. }));
    }

    #[test]
    fn arma_prognoser_uses_both_segments() {
        let train = linear_decay(100, 100.0, 0.3);
        let uut = linear_decay(30, 95.0, 0.3);
        let p = ArmaPrognoser { q: 0 }.prognose(&train, &uut, 1, 50).unwrap();
        let expected = 95.0 - 0.3 * 30.0;
        assert!((p.path.means[0] - expected).abs() < 1e-6, "{}", p.path.means[0]);
    }

    #[test]
    fn short_history_is_rejected() {
        let train = linear_decay(100, 100.0, 0.3);
        let err = EfsPrognoser::new(Preset::Emg).prognose(&train, &[99.0, 98.0], 5, 10);
        assert_eq!(err.unwrap_err(), Error::HistoryTooShort { needed: 5, got: 2 });
    }
}
