//! Takagi–Sugeno inference over a fixed rule base.
//!
//! Each rule pairs a multivariate Gaussian antecedent with an affine
//! consequent `ŷᵢ = θᵢᵀ [1, xᵀ]ᵀ`. The model output is the convex combination
//! of the local outputs weighted by normalized memberships.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::dist::chi_square_quantile;
use crate::error::{Error, Result};
use crate::evolve::EvolveConfig;
use crate::linalg::{dot, regularized_cholesky, Cholesky, Matrix};

/// One fuzzy rule: Gaussian antecedent plus affine consequent and its RLS
/// state.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FuzzyRule {
    center: Vec<f64>,
    dispersion: Matrix,
    /// Bias first, then one coefficient per input.
    theta: Vec<f64>,
    rls_cov: Matrix,
    support: u64,
    /// Cached factor of the (possibly ridge-regularized) dispersion.
    #[cfg_attr(feature = "serde", serde(skip))]
    factor: Option<Cholesky>,
}

impl PartialEq for FuzzyRule {
    fn eq(&self, other: &Self) -> bool {
        self.center == other.center
            && self.dispersion == other.dispersion
            && self.theta == other.theta
            && self.rls_cov == other.rls_cov
            && self.support == other.support
    }
}

impl FuzzyRule {
    /// Creates a rule. Dimensions must agree: `dispersion` is `n×n`,
    /// `theta` has `n+1` entries and `rls_cov` is `(n+1)×(n+1)`.
    pub fn new(
        center: Vec<f64>,
        dispersion: Matrix,
        theta: Vec<f64>,
        rls_cov: Matrix,
        support: u64,
    ) -> Result<Self> {
        let n = center.len();
        if dispersion.rows() != n || !dispersion.is_square() {
            return Err(Error::DimensionMismatch { expected: n, got: dispersion.rows() });
        }
        if theta.len() != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, got: theta.len() });
        }
        if rls_cov.rows() != n + 1 || !rls_cov.is_square() {
            return Err(Error::DimensionMismatch { expected: n + 1, got: rls_cov.rows() });
        }
        let mut rule = Self { center, dispersion, theta, rls_cov, support, factor: None };
        rule.refresh_cache();
        Ok(rule)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn dispersion(&self) -> &Matrix {
        &self.dispersion
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn rls_cov(&self) -> &Matrix {
        &self.rls_cov
    }

    pub fn support(&self) -> u64 {
        self.support
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Vec<f64>, &mut Matrix, &mut u64) {
        self.factor = None;
        (&mut self.center, &mut self.dispersion, &mut self.support)
    }

    pub(crate) fn consequent_mut(&mut self) -> (&mut Vec<f64>, &mut Matrix) {
        (&mut self.theta, &mut self.rls_cov)
    }

    /// Recomputes the cached dispersion factor. Called after every antecedent
    /// change and after deserialization.
    pub fn refresh_cache(&mut self) {
        self.factor = Some(regularized_cholesky(&self.dispersion).0);
    }

    /// Squared Mahalanobis distance of `x` to the rule center.
    pub fn mahalanobis2(&self, x: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let d2 = match &self.factor {
            Some(f) => f.inverse_quad_form(&diff),
            None => regularized_cholesky(&self.dispersion).0.inverse_quad_form(&diff),
        };
        if d2.is_nan() {
            f64::INFINITY
        } else {
            d2.max(0.0)
        }
    }

    /// Gaussian membership `exp(-½ (x-c)ᵀ Σ⁻¹ (x-c))`, in (0, 1] for finite
    /// inputs near the center and exactly 1 at the center.
    pub fn membership(&self, x: &[f64]) -> f64 {
        libm::exp(-0.5 * self.mahalanobis2(x))
    }

    /// Local affine output `θᵀ [1, xᵀ]ᵀ`.
    pub fn local_output(&self, x: &[f64]) -> f64 {
        self.theta[0] + dot(&self.theta[1..], x)
    }
}

/// An ordered rule base plus the learner configuration that grows it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TsModel {
    n_x: usize,
    rules: Vec<FuzzyRule>,
    config: EvolveConfig,
    /// Squared Mahalanobis radius beyond which a sample starts a new rule:
    /// the chi-square quantile at `config.omega` with `n_x` degrees of freedom.
    creation_radius2: f64,
}

impl TsModel {
    pub fn new(n_x: usize, config: EvolveConfig) -> Result<Self> {
        if n_x == 0 {
            return Err(Error::InvalidLags { lags: 0 });
        }
        config.validate()?;
        Ok(Self {
            n_x,
            rules: Vec::new(),
            config,
            creation_radius2: chi_square_quantile(config.omega, n_x),
        })
    }

    /// Model with a given rule set, e.g. for inference-only use.
    pub fn with_rules(n_x: usize, config: EvolveConfig, rules: Vec<FuzzyRule>) -> Result<Self> {
        let mut model = Self::new(n_x, config)?;
        for r in &rules {
            if r.dim() != n_x {
                return Err(Error::DimensionMismatch { expected: n_x, got: r.dim() });
            }
        }
        model.rules = rules;
        Ok(model)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.rules
    }

    pub(crate) fn rules_mut(&mut self) -> &mut Vec<FuzzyRule> {
        &mut self.rules
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn config(&self) -> &EvolveConfig {
        &self.config
    }

    pub fn creation_radius2(&self) -> f64 {
        self.creation_radius2
    }

    /// Rebuilds per-rule caches; needed after deserializing a snapshot.
    pub fn refresh_caches(&mut self) {
        self.rules.iter_mut().for_each(FuzzyRule::refresh_cache);
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_x {
            return Err(Error::DimensionMismatch { expected: self.n_x, got: x.len() });
        }
        if self.rules.is_empty() {
            return Err(Error::EmptyModel);
        }
        Ok(())
    }

    /// Normalized activation degrees. Nonnegative and summing to one; if every
    /// membership underflows to zero the weights fall back to `1/C`.
    pub fn activations(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut h: Vec<f64> = self.rules.iter().map(|r| r.membership(x)).collect();
        let total: f64 = h.iter().sum();
        if total > 0.0 && total.is_finite() {
            h.iter_mut().for_each(|v| *v /= total);
        } else {
            let c = h.len() as f64;
            h.iter_mut().for_each(|v| *v = 1.0 / c);
        }
        Ok(h)
    }

    /// Model output `Σᵢ hᵢ(x) θᵢᵀ x̃`.
    pub fn infer(&self, x: &[f64]) -> Result<f64> {
        let h = self.activations(x)?;
        Ok(self.rules.iter().zip(&h).map(|(r, hi)| hi * r.local_output(x)).sum())
    }

    /// Effective affine coefficients `hᵀ(x) Θᵀ` (length `n_x + 1`, bias first),
    /// so that the output equals their dot product with `[1, xᵀ]ᵀ`.
    pub fn effective_coefficients(&self, x: &[f64]) -> Result<Vec<f64>> {
        let h = self.activations(x)?;
        Ok(self.blend_thetas(&h))
    }

    pub(crate) fn blend_thetas(&self, h: &[f64]) -> Vec<f64> {
        let mut xi = vec![0.0; self.n_x + 1];
        for (r, hi) in self.rules.iter().zip(h) {
            for (acc, t) in xi.iter_mut().zip(&r.theta) {
                *acc += hi * t;
            }
        }
        xi
    }

    /// Index and squared Mahalanobis distance of the closest rule.
    pub fn best_match(&self, x: &[f64]) -> Option<(usize, f64)> {
        self.rules
            .iter()
            .map(|r| r.mahalanobis2(x))
            .enumerate()
            .fold(None, |best, (i, d2)| match best {
                Some((_, bd)) if bd <= d2 => best,
                _ => Some((i, d2)),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule(center: &[f64], disp: Matrix, theta: &[f64]) -> FuzzyRule {
        let n = center.len();
        FuzzyRule::new(center.to_vec(), disp, theta.to_vec(), Matrix::identity(n + 1), 1).unwrap()
    }

    fn model(rules: Vec<FuzzyRule>) -> TsModel {
        let n = rules[0].dim();
        TsModel::with_rules(n, EvolveConfig::ebets(n), rules).unwrap()
    }

    #[test]
    fn membership_identity_and_unit_offsets() {
        let r = rule(&[0.0, 0.0], Matrix::identity(2), &[0.0, 0.0, 0.0]);
        assert_eq!(r.membership(&[0.0, 0.0]), 1.0);
        assert!((r.membership(&[1.0, 0.0]) - libm::exp(-0.5)).abs() < 1e-15);
        let r = rule(&[1.0], Matrix::from_rows(&[[4.0]]).unwrap(), &[0.0, 0.0]);
        assert!((r.membership(&[3.0]) - libm::exp(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn singular_dispersion_stays_defined() {
        let r = rule(&[0.0, 0.0], Matrix::zeros(2, 2), &[0.0, 0.0, 0.0]);
        assert_eq!(r.membership(&[0.0, 0.0]), 1.0);
        let m = r.membership(&[1e-6, 0.0]);
        assert!((0.0..1.0).contains(&m));
    }

    #[test]
    fn activation_examples() {
        let m = model(vec![rule(&[0.0], Matrix::identity(1), &[0.0, 1.0])]);
        assert_eq!(m.activations(&[5.0]).unwrap(), vec![1.0]);
        assert_eq!(m.infer(&[3.0]).unwrap(), 3.0);

        let r = rule(&[0.0], Matrix::identity(1), &[2.0, 0.0]);
        let mut r2 = r.clone();
        r2.theta = vec![4.0, 0.0];
        let m = model(vec![r, r2]);
        assert_eq!(m.activations(&[0.7]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(m.infer(&[0.7]).unwrap(), 3.0);
    }

    #[test]
    fn activation_normalizes_unequal_memberships() {
        // Memberships 0.6 and 0.2 at x = 0 by choosing offsets d with exp(-d²/2) = m.
        let d1 = libm::sqrt(-2.0 * libm::log(0.6));
        let d2 = libm::sqrt(-2.0 * libm::log(0.2));
        let m = model(vec![
            rule(&[d1], Matrix::identity(1), &[8.0, 0.0]),
            rule(&[d2], Matrix::identity(1), &[0.0, 0.0]),
        ]);
        let h = m.activations(&[0.0]).unwrap();
        assert!((h[0] - 0.75).abs() < 1e-12 && (h[1] - 0.25).abs() < 1e-12);
        assert!((m.infer(&[0.0]).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn far_input_falls_back_to_uniform() {
        let m = model(vec![
            rule(&[0.0], Matrix::from_rows(&[[1e-6]]).unwrap(), &[1.0, 0.0]),
            rule(&[1.0], Matrix::from_rows(&[[1e-6]]).unwrap(), &[3.0, 0.0]),
        ]);
        let h = m.activations(&[1e6]).unwrap();
        assert_eq!(h, vec![0.5, 0.5]);
        assert_eq!(m.infer(&[1e6]).unwrap(), 2.0);
    }

    #[test]
    fn empty_model_and_bad_dims_error() {
        let m = TsModel::new(2, EvolveConfig::ebets(2)).unwrap();
        assert_eq!(m.infer(&[0.0, 0.0]), Err(Error::EmptyModel));
        let m = model(vec![rule(&[0.0], Matrix::identity(1), &[0.0, 1.0])]);
        assert!(matches!(m.infer(&[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
    }
}
