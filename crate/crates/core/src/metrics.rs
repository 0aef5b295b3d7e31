//! Prognostic scoring: MAPE, Relative Accuracy and the α–λ sweep.
//!
//! Sweep positions are 1-based sample indices: sample `k` of a series is
//! cycle `k`. A sweep point at `t_P` forecasts from the lag-aligned origin
//! `s_i = t_P − (ℓ − 3)`, so that every lag count sees the same amount of
//! unit data as a three-lag model started at `t_P`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::prognosis::{estimate_rul, Direction, RulEstimate};
use crate::prognoser::{Prognoser, Prognosis};
use crate::series::DegradationSeries;

/// Mean absolute percentage error `100/N Σ |xᵢ − x̂ᵢ| / |xᵢ|`.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.len() != predicted.len() {
        return Err(Error::DimensionMismatch { expected: actual.len(), got: predicted.len() });
    }
    if actual.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut total = 0.0;
    for (a, p) in actual.iter().zip(predicted) {
        if *a == 0.0 {
            return Err(Error::ZeroReference);
        }
        total += libm::fabs((a - p) / a);
    }
    Ok(100.0 * total / actual.len() as f64)
}

/// `1 − |r − r̂| / r`.
pub fn relative_accuracy(true_rul: f64, est_rul: f64) -> Result<f64> {
    if true_rul == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(1.0 - libm::fabs(true_rul - est_rul) / true_rul)
}

/// `s_i = t_P − (ℓ − 3)`.
pub fn aligned_start(t_p: u32, lags: usize) -> i64 {
    i64::from(t_p) + 3 - lags as i64
}

/// Why a sweep point was not run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    /// `s_i < ℓ`: not enough unit samples to fill one lag vector.
    NotEnoughLags,
    /// The unit has already failed at `t_P`.
    PastFailure,
    /// `s_i` lies beyond the observed data.
    BeyondData,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Skipped(SkipReason),
    /// The forecast never reaches the threshold within the horizon.
    Infeasible,
    /// Training or forecasting failed; kept as data so the sweep continues.
    Failed(Error),
    Estimated,
}

/// One point of the α–λ sweep. RUL values are in cycles relative to `t_P`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaLambdaRecord {
    pub t_p: u32,
    pub s_i: i64,
    pub true_rul: Option<u32>,
    pub outcome: Outcome,
    pub est_rul: Option<i64>,
    pub lower: Option<i64>,
    pub upper: Option<i64>,
    pub ra: Option<f64>,
    /// Trajectory MAPE from `s_i` up to the actual failure.
    pub mape: Option<f64>,
    /// `|r̂ − r| ≤ α_goal · r`.
    pub in_goal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Significance level of the RUL bounds (`1 − confidence`).
    pub alpha: f64,
    /// Half-width of the α–λ goal cone.
    pub alpha_goal: f64,
    pub max_horizon: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { alpha: 0.01, alpha_goal: 0.2, max_horizon: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub record: AlphaLambdaRecord,
    pub prognosis: Option<Prognosis>,
    pub rul: Option<RulEstimate>,
}

/// 1-based index of the first sample at or past the threshold.
pub fn failure_position(hi: &[f64], eta: f64, direction: Direction) -> Option<usize> {
    hi.iter().position(|&v| direction.crossed(v, eta)).map(|i| i + 1)
}

/// Runs `prognoser` from every `t_P` of `unit`, training on `train` plus the
/// unit's samples up to the aligned origin, and scores each RUL estimate
/// against `failure − t_P`.
pub fn alpha_lambda_sweep(
    prognoser: &dyn Prognoser,
    train: &[f64],
    unit: &DegradationSeries,
    t_ps: &[u32],
    lags: usize,
    opts: &SweepOptions,
) -> Vec<SweepPoint> {
    let hi = unit.hi();
    let direction = unit.direction();
    let failure = failure_position(hi, unit.eta(), direction);
    t_ps.iter().map(|&t_p| sweep_point(prognoser, train, hi, unit.eta(), direction, failure, t_p, lags, opts)).collect()
}

#[allow(clippy::too_many_arguments)]
fn sweep_point(
    prognoser: &dyn Prognoser,
    train: &[f64],
    hi: &[f64],
    eta: f64,
    direction: Direction,
    failure: Option<usize>,
    t_p: u32,
    lags: usize,
    opts: &SweepOptions,
) -> SweepPoint {
    let s_i = aligned_start(t_p, lags);
    let true_rul = failure.and_then(|f| (f as i64 - i64::from(t_p)).try_into().ok()).filter(|&r: &u32| r > 0);
    let mut record = AlphaLambdaRecord {
        t_p,
        s_i,
        true_rul,
        outcome: Outcome::Estimated,
        est_rul: None,
        lower: None,
        upper: None,
        ra: None,
        mape: None,
        in_goal: false,
    };
    let skip = if s_i < lags as i64 {
        Some(SkipReason::NotEnoughLags)
    } else if failure.is_some() && true_rul.is_none() {
        Some(SkipReason::PastFailure)
    } else if s_i as usize > hi.len() {
        Some(SkipReason::BeyondData)
    } else {
        None
    };
    if let Some(reason) = skip {
        record.outcome = Outcome::Skipped(reason);
        return SweepPoint { record, prognosis: None, rul: None };
    }
    let origin = s_i as usize;

    let prognosis = match prognoser.prognose(train, &hi[..origin], lags, opts.max_horizon) {
        Ok(p) => p,
        Err(e) => {
            record.outcome = Outcome::Failed(e);
            return SweepPoint { record, prognosis: None, rul: None };
        }
    };
    let rul = match estimate_rul(&prognosis.path, eta, opts.alpha, direction) {
        Ok(r) => r,
        Err(e) => {
            record.outcome = Outcome::Failed(e);
            return SweepPoint { record, prognosis: Some(prognosis), rul: None };
        }
    };
    // With fewer than three lags the origin lies after t_P; a crossing in the
    // observed samples between them is then known exactly.
    let observed_crossing = (t_p as usize..origin)
        .find(|&i| direction.crossed(hi[i], eta))
        .map(|i| (i + 1) as i64 - i64::from(t_p));
    let to_tp = |steps: Option<usize>| {
        observed_crossing.or_else(|| steps.map(|n| s_i + n as i64 - i64::from(t_p)))
    };
    record.est_rul = to_tp(rul.point);
    record.lower = to_tp(rul.lower);
    record.upper = to_tp(rul.upper);

    if let Some(f) = failure {
        let steps = f.saturating_sub(origin).min(prognosis.path.horizon());
        if steps > 0 {
            record.mape = mape(&hi[origin..origin + steps], &prognosis.path.means[..steps]).ok();
        }
    }
    match (record.est_rul, true_rul) {
        (None, _) => record.outcome = Outcome::Infeasible,
        (Some(est), Some(r)) => {
            let ra = relative_accuracy(f64::from(r), est as f64).expect("true RUL is positive");
            record.ra = Some(ra);
            record.in_goal = in_goal(ra, opts.alpha_goal);
        }
        (Some(_), None) => {}
    }
    SweepPoint { record, prognosis: Some(prognosis), rul: Some(rul) }
}

/// Goal-cone membership `RA ≥ 1 − α_goal`, with a rounding allowance.
pub fn in_goal(ra: f64, alpha_goal: f64) -> bool {
    ra >= 1.0 - alpha_goal - 1e-12
}
