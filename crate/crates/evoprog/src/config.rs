//! Experiment configuration (JSON, `"schema": 1`).

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context};
use evoprog_core::{ArmaPrognoser, EfsPrognoser, Preset, Prognoser};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ebets,
    Exts,
    Emg,
    Arma,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Ebets, Algorithm::Exts, Algorithm::Emg, Algorithm::Arma];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ebets => "ebets",
            Algorithm::Exts => "exts",
            Algorithm::Emg => "emg",
            Algorithm::Arma => "arma",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn prognoser(self) -> Box<dyn Prognoser + Send + Sync> {
        match self {
            Algorithm::Ebets => Box::new(EfsPrognoser::new(Preset::Ebets)),
            Algorithm::Exts => Box::new(EfsPrognoser::new(Preset::Exts)),
            Algorithm::Emg => Box::new(EfsPrognoser::new(Preset::Emg)),
            Algorithm::Arma => Box::new(ArmaPrognoser { q: 0 }),
        }
    }

    /// Largest lag count searched; ARMA orders are limited to 10.
    pub fn max_lags(self, configured: usize) -> usize {
        match self {
            Algorithm::Arma => configured.min(10),
            _ => configured,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    /// Directory holding `<battery>.csv` files.
    pub data_dir: PathBuf,
    /// Generate seeded synthetic batteries instead of reading `data_dir`.
    #[serde(default)]
    pub synthetic: bool,
    pub train_battery: String,
    pub test_batteries: Vec<String>,
    pub algorithms: Vec<Algorithm>,
    pub t_p: Vec<u32>,
    pub confidence: f64,
    pub eta: f64,
    pub rated_ah: f64,
    pub min_lags: usize,
    pub max_lags: usize,
    /// Skip tuning and use these lag counts.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fixed_lags: BTreeMap<Algorithm, usize>,
    /// Forecast horizon; defaults to five training lengths, capped at 2000.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_horizon: Option<usize>,
    pub alpha_goal: f64,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            data_dir: PathBuf::from("data"),
            synthetic: false,
            train_battery: "B0006".into(),
            test_batteries: vec!["B0005".into(), "B0007".into(), "B0018".into()],
            algorithms: Algorithm::ALL.to_vec(),
            t_p: vec![20, 40, 60, 80, 100],
            confidence: 0.99,
            eta: 70.0,
            rated_ah: 2.0,
            min_lags: 1,
            max_lags: 20,
            fixed_lags: BTreeMap::new(),
            max_horizon: None,
            alpha_goal: 0.2,
            seed: 0,
            jobs: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let config: Self = serde_json::from_str(text).context("invalid configuration JSON")?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.schema != SCHEMA_VERSION {
            bail!("unsupported config schema {} (expected {SCHEMA_VERSION})", self.schema);
        }
        if self.test_batteries.is_empty() {
            bail!("no test batteries configured");
        }
        if self.test_batteries.contains(&self.train_battery) {
            bail!("training battery {} is also a test battery", self.train_battery);
        }
        if self.algorithms.is_empty() {
            bail!("no algorithms configured");
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            bail!("confidence must lie in (0, 1), got {}", self.confidence);
        }
        if !(self.alpha_goal > 0.0 && self.alpha_goal < 1.0) {
            bail!("alpha_goal must lie in (0, 1), got {}", self.alpha_goal);
        }
        if self.rated_ah.is_nan() || self.rated_ah <= 0.0 || !self.eta.is_finite() {
            bail!("rated_ah must be positive and eta finite");
        }
        if self.min_lags == 0 || self.min_lags > self.max_lags || self.max_lags > 20 {
            bail!("lag range must satisfy 1 <= min_lags <= max_lags <= 20");
        }
        if let Some((algo, &l)) = self.fixed_lags.iter().find(|(_, &l)| l == 0 || l > 20) {
            bail!("fixed lag count {l} for {} outside 1..=20", algo.name());
        }
        if self.t_p.is_empty() || self.t_p.contains(&0) {
            bail!("t_p values must be positive");
        }
        if self.max_horizon == Some(0) {
            bail!("max_horizon must be at least 1");
        }
        if self.jobs == 0 {
            bail!("jobs must be at least 1");
        }
        Ok(())
    }

    /// Significance level of the RUL bounds.
    pub fn alpha(&self) -> f64 {
        1.0 - self.confidence
    }
}
