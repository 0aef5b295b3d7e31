//! Iterated long-horizon prediction with analytic variance propagation and
//! RUL extraction.
//!
//! Starting from the last observed state `x_k`, each step feeds the expected
//! lag vector back into the model. Rule activations are evaluated at that
//! expected vector and held constant, so the `N`-step variance is
//! `λ²_N = Ξ_N Λ_N Ξ_Nᵀ + σ²_ε`, where `Ξ_N` is the activation-blended
//! coefficient row and `Λ_N` the covariance of the augmented lag vector:
//! zero bias row/column, `λ²_{N−i}` on the diagonal and
//! `λ_{N−i} λ_{N−j} ρ̂_{ij}` off it, with `λ_m = 0` for observed states
//! (`m ≤ 0`).

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::dist::normal_quantile;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::ts::TsModel;

/// Lag vector, newest entry first, with a flag per entry telling whether it
/// is an observation (`true`) or a model estimate (`false`).
#[derive(Debug, Clone, PartialEq)]
pub struct LagVector {
    pub values: Vec<f64>,
    pub known: Vec<bool>,
}

impl LagVector {
    /// `[1, valuesᵀ]ᵀ`.
    pub fn augmented(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.values.len() + 1);
        v.push(1.0);
        v.extend_from_slice(&self.values);
        v
    }
}

/// Builds the lag vector used to predict `x_{k+N}`.
///
/// `history` holds observations oldest first (its last element is `x_k`);
/// `estimates[i]` is `x̂_{k+1+i}`. For `N = 1` every entry is observed, for
/// `2 ≤ N ≤ L` the newest `N − 1` entries are estimates, and for `N > L` all
/// are.
pub fn build_lag_vector(
    history: &[f64],
    estimates: &[f64],
    step: usize,
    lags: usize,
) -> Result<LagVector> {
    if step == 0 {
        return Err(Error::InvalidParameter("step must be at least 1"));
    }
    if history.len() < lags {
        return Err(Error::HistoryTooShort { needed: lags, got: history.len() });
    }
    if estimates.len() < step - 1 {
        return Err(Error::InsufficientData { needed: step - 1, got: estimates.len() });
    }
    let last = history.len() - 1;
    let mut values = Vec::with_capacity(lags);
    let mut known = Vec::with_capacity(lags);
    for p in 0..lags {
        // Entry p holds time k + (step - 1 - p).
        let ahead = step as isize - 1 - p as isize;
        if ahead >= 1 {
            values.push(estimates[ahead as usize - 1]);
            known.push(false);
        } else {
            values.push(history[(last as isize + ahead) as usize]);
            known.push(true);
        }
    }
    Ok(LagVector { values, known })
}

/// Which way the health index travels toward the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Direction {
    /// The index falls toward the threshold (capacity fade).
    Decreasing,
    /// The index grows toward the threshold (damage accumulation).
    Increasing,
}

impl Direction {
    /// Decreasing when the series starts at or above the threshold.
    pub fn from_start(first: f64, eta: f64) -> Self {
        if first >= eta {
            Direction::Decreasing
        } else {
            Direction::Increasing
        }
    }

    /// Whether `value` has reached the threshold.
    pub fn crossed(self, value: f64, eta: f64) -> bool {
        match self {
            Direction::Decreasing => value <= eta,
            Direction::Increasing => value >= eta,
        }
    }
}

/// Pearson correlations between lagged copies of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlations {
    pub matrix: Matrix,
    /// Set when some lagged copy had zero variance; the matrix is then the
    /// identity.
    pub degenerate: bool,
}

/// Correlation between the series lagged by `i` and by `j` (1-based lags),
/// computed over the window where all `lags` lagged copies are defined.
pub fn estimate_correlations(history: &[f64], lags: usize) -> Result<Correlations> {
    if lags == 0 {
        return Err(Error::InvalidLags { lags });
    }
    if history.len() < lags + 2 {
        return Err(Error::HistoryTooShort { needed: lags + 2, got: history.len() });
    }
    let n = history.len();
    let window = n - lags;
    // Lag i (1-based) covers history[lags - i .. n - i].
    let copies: Vec<&[f64]> = (1..=lags).map(|i| &history[lags - i..n - i]).collect();
    let stats: Vec<(f64, f64)> = copies
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / window as f64;
            let ss = c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
            (mean, ss)
        })
        .collect();

    if stats.iter().any(|&(_, ss)| !(ss > 0.0)) {
        return Ok(Correlations { matrix: Matrix::identity(lags), degenerate: true });
    }

    let mut matrix = Matrix::identity(lags);
    for i in 0..lags {
        for j in (i + 1)..lags {
            let (mi, si) = stats[i];
            let (mj, sj) = stats[j];
            let cov: f64 = copies[i].iter().zip(copies[j]).map(|(a, b)| (a - mi) * (b - mj)).sum();
            let r = (cov / libm::sqrt(si * sj)).clamp(-1.0, 1.0);
            matrix[(i, j)] = r;
            matrix[(j, i)] = r;
        }
    }
    Ok(Correlations { matrix, degenerate: false })
}

/// Expected trajectory and its variance over the prediction horizon.
///
/// `means[n]` and `variances[n]` describe `x̂_{k+n+1}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ForecastPath {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub corr: Matrix,
    pub sigma_eps2: f64,
}

impl ForecastPath {
    pub fn horizon(&self) -> usize {
        self.means.len()
    }

    /// Standard deviation `ν_N` of step `N` (1-based).
    pub fn std_dev(&self, step: usize) -> f64 {
        libm::sqrt(self.variances[step - 1].max(0.0))
    }

    /// `(lower, upper)` prediction band at `mean ∓ z ν` for each step.
    pub fn bands(&self, z: f64) -> Vec<(f64, f64)> {
        (1..=self.horizon())
            .map(|n| {
                let half = z * self.std_dev(n);
                (self.means[n - 1] - half, self.means[n - 1] + half)
            })
            .collect()
    }

    /// Rescales means by `factor` and variances by `factor²`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.means.iter_mut().for_each(|m| *m *= factor);
        self.variances.iter_mut().for_each(|v| *v *= factor * factor);
        self.sigma_eps2 *= factor * factor;
        self
    }
}

/// Iterates the model from the end of `history` for up to `max_horizon`
/// steps, propagating the residual variance `sigma_eps2` through the lags
/// with the lag correlations `corr` (`L×L`).
///
/// Iteration stops early if the expected state becomes non-finite; the
/// returned path is then shorter than `max_horizon`.
pub fn forecast(
    model: &TsModel,
    history: &[f64],
    sigma_eps2: f64,
    corr: &Matrix,
    max_horizon: usize,
) -> Result<ForecastPath> {
    let lags = model.n_x();
    if model.rule_count() == 0 {
        return Err(Error::EmptyModel);
    }
    if max_horizon == 0 {
        return Err(Error::InvalidParameter("max_horizon must be at least 1"));
    }
    if corr.rows() != lags || corr.cols() != lags {
        return Err(Error::DimensionMismatch { expected: lags, got: corr.rows() });
    }
    if !(sigma_eps2 >= 0.0) {
        return Err(Error::InvalidParameter("sigma_eps2 must be nonnegative"));
    }
    let mut means: Vec<f64> = Vec::with_capacity(max_horizon);
    let mut variances: Vec<f64> = Vec::with_capacity(max_horizon);
    let mut std_devs: Vec<f64> = Vec::with_capacity(max_horizon);

    for step in 1..=max_horizon {
        let lag = build_lag_vector(history, &means, step, lags)?;
        let xi = model.effective_coefficients(&lag.values)?;
        let mean = dot(&xi, &lag.augmented());
        if !mean.is_finite() {
            break;
        }
        let variance = if step == 1 {
            sigma_eps2
        } else {
            // Bias row/column of the augmented covariance is zero, so only the
            // lag coefficients xi[1..] contribute.
            let lambda = |i: usize| if step > i { std_devs[step - i - 1] } else { 0.0 };
            let mut propagated = 0.0;
            for i in 1..=lags {
                let li = lambda(i);
                if li == 0.0 {
                    continue;
                }
                for j in 1..=lags {
                    let lj = lambda(j);
                    if lj == 0.0 {
                        continue;
                    }
                    propagated += xi[i] * xi[j] * li * lj * corr[(i - 1, j - 1)];
                }
            }
            propagated.max(0.0) + sigma_eps2
        };
        means.push(mean);
        variances.push(variance);
        std_devs.push(libm::sqrt(variance));
    }

    Ok(ForecastPath { means, variances, corr: corr.clone(), sigma_eps2 })
}

/// RUL point estimate and confidence bounds, in prediction steps. `None`
/// means the threshold is not reached within the forecast horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RulEstimate {
    pub point: Option<usize>,
    pub lower: Option<usize>,
    pub upper: Option<usize>,
    pub threshold: f64,
    pub alpha: f64,
}

impl RulEstimate {
    pub fn is_feasible(&self) -> bool {
        self.point.is_some()
    }
}

/// First step at which the mean crosses `eta` (point), and at which the
/// `(1 − α)` prediction band first touches it.
///
/// For a decreasing index the lower RUL bound comes from the lower band
/// `x̂ − z ν` and the upper bound from `x̂ + z ν`, with `z = z_{1−α/2}`;
/// for an increasing index the roles swap.
pub fn estimate_rul(
    path: &ForecastPath,
    eta: f64,
    alpha: f64,
    direction: Direction,
) -> Result<RulEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter("alpha must lie in (0, 1)"));
    }
    let z = normal_quantile(1.0 - alpha / 2.0);
    let first = |offset: f64| {
        (1..=path.horizon()).find(|&n| {
            let value = path.means[n - 1] + offset * z * path.std_dev(n);
            direction.crossed(value, eta)
        })
    };
    // Sign of the band offset that reaches the threshold soonest.
    let early = match direction {
        Direction::Decreasing => -1.0,
        Direction::Increasing => 1.0,
    };
    Ok(RulEstimate {
        point: first(0.0),
        lower: first(early),
        upper: first(-early),
        threshold: eta,
        alpha,
    })
}
