//! Online structural and parametric learning for [`TsModel`].
//!
//! A sample whose squared Mahalanobis distance to every rule exceeds the
//! chi-square quantile at `omega` starts a new rule centered on it; otherwise
//! the closest rule's antecedent is smoothed toward the sample. Consequents of
//! all rules are then refined by weighted RLS using the normalized
//! activations as weights.

use alloc::vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::tracker::ErrorTracker;
use crate::ts::{FuzzyRule, TsModel};

/// Learner hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EvolveConfig {
    /// Compatibility confidence level in (0, 1).
    pub omega: f64,
    /// Support a rule needs before its residuals count toward the error
    /// tracker.
    pub tau: u64,
    /// Antecedent learning rate in (0, 1].
    pub gamma: f64,
    /// RLS covariance initialization scale.
    pub delta: f64,
    /// Initial dispersion `sigma_init * I` of a new rule.
    pub sigma_init: f64,
}

/// Named hyperparameter presets. They reuse published default values of the
/// corresponding algorithms; the learner itself is the same for all three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Preset {
    Ebets,
    Exts,
    Emg,
}

impl Preset {
    pub fn config(self, lags: usize) -> EvolveConfig {
        match self {
            Preset::Ebets => EvolveConfig::ebets(lags),
            Preset::Exts => EvolveConfig::exts(lags),
            Preset::Emg => EvolveConfig::emg(lags),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Ebets => "ebets",
            Preset::Exts => "exts",
            Preset::Emg => "emg",
        }
    }
}

impl EvolveConfig {
    /// ω = 95.45 %, τ = ℓ+1, γ = 0.5, δ = 10³.
    pub fn ebets(lags: usize) -> Self {
        Self { omega: 0.9545, tau: lags as u64 + 1, gamma: 0.5, delta: 1e3, sigma_init: 1e-3 }
    }

    /// Covariance initialization Ω = 10³; a one-sigma zone of influence makes
    /// rule creation more eager.
    pub fn exts(lags: usize) -> Self {
        Self { omega: 0.6827, tau: lags as u64 + 1, gamma: 0.5, delta: 1e3, sigma_init: 1e-3 }
    }

    /// β = 0.05, compatibility α = 0.01 (ω = 0.99), window w = 20,
    /// Σ_init = 10⁻³·I.
    pub fn emg(_lags: usize) -> Self {
        Self { omega: 0.99, tau: 20, gamma: 0.05, delta: 1e3, sigma_init: 1e-3 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return Err(Error::InvalidParameter("omega must lie in (0, 1)"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidParameter("gamma must lie in (0, 1]"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter("delta must be positive"));
        }
        if self.tau < 1 {
            return Err(Error::InvalidParameter("tau must be at least 1"));
        }
        if !(self.sigma_init > 0.0 && self.sigma_init.is_finite()) {
            return Err(Error::InvalidParameter("sigma_init must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Created,
    Updated,
}

/// Outcome of one [`learn_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnReport {
    pub action: Action,
    pub rule_index: usize,
    /// `y − ŷ` before the model was updated.
    pub residual: f64,
    /// Whether the residual was pushed into the tracker.
    pub tracked: bool,
}

/// Learns one `(x, y)` sample.
///
/// The prequential residual is pushed into `tracker` when the closest rule
/// already has `tau` samples of support. The very first sample always
/// creates rule 0 and reports a zero residual.
pub fn learn_step(
    model: &mut TsModel,
    x: &[f64],
    y: f64,
    tracker: &mut ErrorTracker,
) -> Result<LearnReport> {
    let n = model.n_x();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let cfg = *model.config();

    let (action, rule_index, residual, tracked) = match model.best_match(x) {
        None => {
            let rule = new_rule(x, vec![0.0; n + 1], &cfg)?;
            model.rules_mut().push(rule);
            (Action::Created, 0, 0.0, false)
        }
        Some((best, d2)) => {
            let residual = y - model.infer(x)?;
            let tracked = model.rules()[best].support() >= cfg.tau;
            if tracked {
                tracker.push(residual);
            }
            if d2 > model.creation_radius2() {
                let h = model.activations(x)?;
                let theta = model.blend_thetas(&h);
                let rule = new_rule(x, theta, &cfg)?;
                model.rules_mut().push(rule);
                (Action::Created, model.rule_count() - 1, residual, tracked)
            } else {
                update_antecedent(&mut model.rules_mut()[best], x, cfg.gamma);
                (Action::Updated, best, residual, tracked)
            }
        }
    };

    let h = model.activations(x)?;
    let mut x_tilde = vec![1.0];
    x_tilde.extend_from_slice(x);
    for (rule, hi) in model.rules_mut().iter_mut().zip(h) {
        rls_update(rule, &x_tilde, y, hi);
    }

    Ok(LearnReport { action, rule_index, residual, tracked })
}

fn new_rule(x: &[f64], theta: alloc::vec::Vec<f64>, cfg: &EvolveConfig) -> Result<FuzzyRule> {
    let n = x.len();
    FuzzyRule::new(
        x.to_vec(),
        Matrix::scaled_identity(n, cfg.sigma_init),
        theta,
        Matrix::scaled_identity(n + 1, cfg.delta),
        1,
    )
}

/// Smooths the antecedent toward `x` with step `γ' = gamma / support`:
/// `c ← c + γ'(x − c)`, `Σ ← (1−γ')Σ + γ'(x − c)(x − c)ᵀ` using the updated
/// center, then increments the support.
pub fn update_antecedent(rule: &mut FuzzyRule, x: &[f64], gamma: f64) {
    {
        let (center, dispersion, support) = rule.parts_mut();
        let step = gamma / (*support).max(1) as f64;
        for (c, xi) in center.iter_mut().zip(x) {
            *c += step * (xi - *c);
        }
        let diff: alloc::vec::Vec<f64> = x.iter().zip(center.iter()).map(|(a, c)| a - c).collect();
        dispersion.scale(1.0 - step);
        dispersion.add_outer(step, &diff, &diff);
        dispersion.symmetrize();
        *support += 1;
    }
    rule.refresh_cache();
}

/// Weighted RLS on the rule consequent:
/// `K = P x̃ / (1/h + x̃ᵀ P x̃)`, `θ ← θ + K (y − x̃ᵀθ)`, `P ← P − K x̃ᵀ P`.
/// A zero weight leaves the rule untouched.
pub fn rls_update(rule: &mut FuzzyRule, x_tilde: &[f64], y: f64, h: f64) {
    if !(h > 0.0) {
        return;
    }
    let (theta, cov) = rule.consequent_mut();
    let px = cov.mul_vec(x_tilde);
    let denom = 1.0 / h + dot(x_tilde, &px);
    if !(denom > 0.0) || !denom.is_finite() {
        return;
    }
    let err = y - dot(x_tilde, theta);
    for (t, p) in theta.iter_mut().zip(&px) {
        *t += p / denom * err;
    }
    cov.add_outer(-1.0 / denom, &px, &px);
    cov.symmetrize();
}
