//! Lag selection by validation against a double-exponential capacity model.
//!
//! Without the unit's real failure time, validation compares each candidate
//! model with a pseudo ground truth: the average of
//! `C(k; c) = c₁ e^{c₂ k} + c₃ e^{c₄ k}` fitted to the whole training series
//! and the same curve refitted (from the training coefficients) to the first
//! samples of the unit. Each lag count `ℓ` is scored by
//! `I_j = RA_j + (1 − MAPE_j/100) + (1 − ℓ/20)` averaged over the checkpoints
//! `j`, and the best mean wins (ties go to the smaller `ℓ`).

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{regularized_cholesky, Matrix};
use crate::metrics::{mape, relative_accuracy};
use crate::prognosis::{estimate_rul, Direction};
use crate::prognoser::Prognoser;

/// Double-exponential capacity curve, evaluated at 1-based cycle `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ExpModel {
    pub c: [f64; 4],
}

impl ExpModel {
    pub fn eval(&self, k: f64) -> f64 {
        let [c1, c2, c3, c4] = self.c;
        c1 * libm::exp(c2 * k) + c3 * libm::exp(c4 * k)
    }

    /// `∂C/∂c` at `k`.
    fn gradient(&self, k: f64) -> [f64; 4] {
        let [c1, c2, c3, c4] = self.c;
        let e2 = libm::exp(c2 * k);
        let e4 = libm::exp(c4 * k);
        [e2, c1 * k * e2, e4, c3 * k * e4]
    }

    /// Sum of squared residuals over `series` at cycles `1..=len`.
    pub fn sse(&self, series: &[f64]) -> f64 {
        series
            .iter()
            .enumerate()
            .map(|(i, y)| {
                let r = y - self.eval((i + 1) as f64);
                r * r
            })
            .sum()
    }
}

/// Result of [`fit_exponential`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ExpFit {
    pub model: ExpModel,
    pub sse: f64,
    pub iterations: usize,
}

const LM_MAX_ITER: usize = 500;
const LM_REL_TOL: f64 = 1e-10;

/// Levenberg–Marquardt least squares of [`ExpModel`] on `series` (cycles
/// `1..=len`), started at `c0`.
///
/// The damped system `(JᵀJ + μ diag(JᵀJ)) δ = Jᵀr` is solved each iteration;
/// accepted steps shrink `μ`, rejected ones grow it. Iteration stops when an
/// accepted step lowers the cost by less than `1e-10` relative, after 500
/// iterations, or when no step can lower it any more.
pub fn fit_exponential(series: &[f64], c0: [f64; 4]) -> Result<ExpFit> {
    if series.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if series.iter().chain(&c0).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut model = ExpModel { c: c0 };
    let mut cost = model.sse(series);
    if !cost.is_finite() {
        return Err(Error::FitDiverged { best: c0 });
    }
    let mut mu = 1e-3;
    let mut iterations = 0;
    while iterations < LM_MAX_ITER && cost > 0.0 {
        iterations += 1;
        let mut jtj = Matrix::zeros(4, 4);
        let mut jtr = [0.0; 4];
        for (i, y) in series.iter().enumerate() {
            let k = (i + 1) as f64;
            let g = model.gradient(k);
            let r = y - model.eval(k);
            jtj.add_outer(1.0, &g, &g);
            for (acc, gi) in jtr.iter_mut().zip(&g) {
                *acc += gi * r;
            }
        }
        if !jtj.is_finite() || jtr.iter().any(|v| !v.is_finite()) {
            return Err(Error::FitDiverged { best: model.c });
        }
        let max_diag = (0..4).map(|i| jtj[(i, i)]).fold(0.0, f64::max);
        let floor = 1e-12 * max_diag.max(1e-300);

        let mut accepted = false;
        while mu < 1e16 {
            let mut damped = jtj.clone();
            for i in 0..4 {
                damped[(i, i)] += mu * jtj[(i, i)].max(floor);
            }
            let step = regularized_cholesky(&damped).0.solve(&jtr);
            let mut trial = model;
            for (c, d) in trial.c.iter_mut().zip(&step) {
                *c += d;
            }
            let trial_cost = trial.sse(series);
            if trial_cost.is_finite() && trial_cost < cost {
                let rel = (cost - trial_cost) / cost;
                model = trial;
                cost = trial_cost;
                mu = (mu / 3.0).max(1e-12);
                accepted = true;
                if rel < LM_REL_TOL {
                    return Ok(ExpFit { model, sse: cost, iterations });
                }
                break;
            }
            mu *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    Ok(ExpFit { model, sse: cost, iterations })
}

/// Steps from cycle `k` until the average of the two curves reaches `eta`,
/// scanning at most `horizon` steps.
pub fn pseudo_rul(
    train_model: &ExpModel,
    test_model: &ExpModel,
    eta: f64,
    k: usize,
    horizon: usize,
    direction: Direction,
) -> Option<usize> {
    (1..=horizon).find(|&n| {
        let kk = (k + n) as f64;
        direction.crossed(0.5 * (train_model.eval(kk) + test_model.eval(kk)), eta)
    })
}

/// `RA + (1 − MAPE/100) + (1 − ℓ/20)`.
pub fn compute_index(ra: f64, mape: f64, lags: usize) -> f64 {
    ra + (1.0 - mape / 100.0) + (1.0 - lags as f64 / 20.0)
}

/// Lagged input rows (newest first) and next-step targets of `series`.
pub fn hankel(series: &[f64], lags: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if lags == 0 {
        return Err(Error::InvalidLags { lags });
    }
    if series.len() <= lags {
        return Err(Error::HistoryTooShort { needed: lags + 1, got: series.len() });
    }
    let rows = (lags..series.len()).map(|t| (1..=lags).map(|i| series[t - i]).collect()).collect();
    Ok((rows, series[lags..].to_vec()))
}

/// Validation protocol settings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ValidationOptions {
    pub min_lags: usize,
    pub max_lags: usize,
    /// Unit samples at which validation prognoses start.
    pub checkpoints: Vec<usize>,
    /// Fault threshold in series units.
    pub eta: f64,
    /// Divisor applied before exponential fitting (100 turns percent into a
    /// capacity ratio).
    pub scale: f64,
    /// Starting point of the training-series fit.
    pub c0: [f64; 4],
    /// Significance level used for the RUL estimate.
    pub alpha: f64,
    pub max_horizon: usize,
    /// Scan limit of the pseudo ground truth.
    pub pseudo_horizon: usize,
}

impl ValidationOptions {
    /// Lags 1–20, checkpoints 5/10/15/20, threshold `eta`, start point `[1, 1, 1, 0]`,
    /// pseudo horizon ten times the training length.
    pub fn new(eta: f64, train_len: usize) -> Self {
        Self {
            min_lags: 1,
            max_lags: 20,
            checkpoints: vec![5, 10, 15, 20],
            eta,
            scale: 100.0,
            c0: [1.0, 1.0, 1.0, 0.0],
            alpha: 0.01,
            max_horizon: (5 * train_len).min(2000),
            pseudo_horizon: 10 * train_len,
        }
    }

    /// Number of unit samples the protocol consumes.
    pub fn head_len(&self) -> usize {
        self.checkpoints.iter().copied().max().unwrap_or(0)
    }
}

/// Pseudo ground truth shared by all lag candidates of one unit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Reference {
    pub train_fit: ExpFit,
    pub test_fit: ExpFit,
    /// Start points that were tried for the training fit, in order; the
    /// best-cost result is used.
    pub train_starts: Vec<[f64; 4]>,
    pub direction: Direction,
}

impl Reference {
    /// Averaged curve in series units at cycle `k`.
    pub fn eval(&self, k: f64, scale: f64) -> f64 {
        0.5 * scale * (self.train_fit.model.eval(k) + self.test_fit.model.eval(k))
    }
}

/// Data-driven start points tried after the configured one: a single
/// exponential through the first and last values with a small, quickly
/// vanishing second term.
fn fallback_starts(series: &[f64]) -> Vec<[f64; 4]> {
    let n = series.len() as f64;
    let first = series[0];
    let last = series[series.len() - 1];
    let rate = if first > 0.0 && last > 0.0 && n > 1.0 { libm::log(last / first) / (n - 1.0) } else { 0.0 };
    let c3 = first / libm::exp(rate);
    vec![[-0.01 * first, -0.1, c3, rate], [0.01 * first, -0.1, c3, rate], [0.0, 0.0, c3, rate]]
}

fn best_fit(series: &[f64], starts: &[[f64; 4]]) -> Result<ExpFit> {
    let mut best: Option<ExpFit> = None;
    let mut last_err = Error::FitDiverged { best: starts[0] };
    for &s in starts {
        match fit_exponential(series, s) {
            Ok(fit) if best.is_none_or(|b| fit.sse < b.sse) => best = Some(fit),
            Ok(_) => {}
            Err(e) => last_err = e,
        }
    }
    best.ok_or(last_err)
}

/// Steps 1–2 of the protocol: fit the training curve (configured start plus
/// fallbacks), then refit on the unit's head starting from it.
pub fn build_reference(train: &[f64], unit_head: &[f64], opts: &ValidationOptions) -> Result<Reference> {
    if unit_head.is_empty() || train.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let train_scaled: Vec<f64> = train.iter().map(|v| v / opts.scale).collect();
    let head_scaled: Vec<f64> = unit_head.iter().map(|v| v / opts.scale).collect();
    let mut train_starts = vec![opts.c0];
    train_starts.extend(fallback_starts(&train_scaled));
    let train_fit = best_fit(&train_scaled, &train_starts)?;
    let test_fit = best_fit(&head_scaled, &[train_fit.model.c])?;
    Ok(Reference { train_fit, test_fit, train_starts, direction: Direction::from_start(train[0], opts.eta) })
}

/// Score of one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CheckpointScore {
    pub checkpoint: usize,
    pub pseudo_rul: Option<usize>,
    pub est_rul: Option<usize>,
    pub ra: f64,
    pub mape: f64,
    pub index: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LagScore {
    pub lags: usize,
    pub checkpoints: Vec<CheckpointScore>,
    pub mean_index: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LagSelection {
    pub lags: usize,
    pub scores: Vec<LagScore>,
    pub reference: Reference,
}

/// Validation score of `lags` on one unit: train on `train`, forecast from
/// each checkpoint of `unit_head` and compare with the reference curve.
///
/// A checkpoint that cannot be run (too few samples for the lag vector, a
/// failed fit, an unreached pseudo or estimated RUL) scores `RA = 0` and
/// `MAPE = 100`.
pub fn score_lags(
    prognoser: &dyn Prognoser,
    train: &[f64],
    unit_head: &[f64],
    reference: &Reference,
    lags: usize,
    opts: &ValidationOptions,
) -> LagScore {
    let checkpoints: Vec<CheckpointScore> = opts
        .checkpoints
        .iter()
        .map(|&j| {
            let mut score = CheckpointScore { checkpoint: j, pseudo_rul: None, est_rul: None, ra: 0.0, mape: 100.0, index: 0.0 };
            score.pseudo_rul = pseudo_rul(
                &reference.train_fit.model,
                &reference.test_fit.model,
                opts.eta / opts.scale,
                j,
                opts.pseudo_horizon,
                reference.direction,
            );
            if j >= lags && j <= unit_head.len() {
                if let Ok(p) = prognoser.prognose(train, &unit_head[..j], lags, opts.max_horizon) {
                    score.est_rul = estimate_rul(&p.path, opts.eta, opts.alpha, reference.direction)
                        .ok()
                        .and_then(|r| r.point);
                    if let Some(r) = score.pseudo_rul {
                        let steps = r.min(p.path.horizon());
                        let actual: Vec<f64> = (1..=steps).map(|n| reference.eval((j + n) as f64, opts.scale)).collect();
                        if steps > 0 {
                            score.mape = mape(&actual, &p.path.means[..steps]).unwrap_or(100.0);
                        }
                        if let Some(est) = score.est_rul {
                            score.ra = relative_accuracy(r as f64, est as f64).unwrap_or(0.0);
                        }
                    }
                }
            }
            score.index = compute_index(score.ra, score.mape, lags);
            score
        })
        .collect();
    let mean_index = checkpoints.iter().map(|c| c.index).sum::<f64>() / checkpoints.len().max(1) as f64;
    LagScore { lags, checkpoints, mean_index }
}

/// Arg-max of the mean index; the first (smallest-lag) maximum wins ties.
/// Scores must be ordered by increasing lag.
pub fn pick_best(scores: &[LagScore]) -> Option<usize> {
    scores
        .iter()
        .fold(None::<&LagScore>, |best, s| match best {
            Some(b) if b.mean_index >= s.mean_index => Some(b),
            _ => Some(s),
        })
        .map(|s| s.lags)
}

/// Full protocol, scoring lags `min_lags..=max_lags` sequentially.
pub fn select_lags(
    prognoser: &dyn Prognoser,
    train: &[f64],
    unit_head: &[f64],
    opts: &ValidationOptions,
) -> Result<LagSelection> {
    if opts.min_lags == 0 || opts.min_lags > opts.max_lags {
        return Err(Error::InvalidLags { lags: opts.min_lags });
    }
    if unit_head.len() < opts.head_len() {
        return Err(Error::HistoryTooShort { needed: opts.head_len(), got: unit_head.len() });
    }
    let head = &unit_head[..opts.head_len()];
    let reference = build_reference(train, head, opts)?;
    let scores: Vec<LagScore> = (opts.min_lags..=opts.max_lags)
        .map(|l| score_lags(prognoser, train, head, &reference, l, opts))
        .collect();
    let lags = pick_best(&scores).expect("non-empty lag range");
    Ok(LagSelection { lags, scores, reference })
}
