//! Shared generators for the core test suites.
#![allow(dead_code)]

use evoprog_core::{EvolveConfig, FuzzyRule, Matrix, TsModel};
use proptest::prelude::*;

/// Symmetric positive-definite matrix `A Aᵀ + 0.1 I`.
pub fn spd(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |a| {
        let mut m = Matrix::scaled_identity(n, 0.1);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += (0..n).map(|k| a[i * n + k] * a[j * n + k]).sum::<f64>();
            }
        }
        m
    })
}

pub fn rule(n: usize) -> impl Strategy<Value = FuzzyRule> {
    (
        prop::collection::vec(-2.0..2.0f64, n),
        spd(n),
        prop::collection::vec(-3.0..3.0f64, n + 1),
        1u64..50,
    )
        .prop_map(move |(c, d, t, s)| FuzzyRule::new(c, d, t, Matrix::identity(n + 1), s).unwrap())
}

/// Model with 1–`max_rules` rules in `n_x ∈ 1..=max_dim`, plus an input.
pub fn model_and_input(max_rules: usize, max_dim: usize) -> impl Strategy<Value = (TsModel, Vec<f64>)> {
    (1..=max_dim).prop_flat_map(move |n| {
        (
            prop::collection::vec(rule(n), 1..=max_rules),
            prop::collection::vec(-4.0..4.0f64, n),
        )
            .prop_map(move |(rules, x)| (TsModel::with_rules(n, EvolveConfig::ebets(n), rules).unwrap(), x))
    })
}
