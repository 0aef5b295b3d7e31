//! End-to-end experiment: tune lags, run α–λ sweeps, and render the output
//! tree. Pairs run on a bounded thread pool; results are gathered in
//! configuration order and written by a single collector, so the tree does
//! not depend on scheduling.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use evoprog_core::dist::normal_quantile;
use evoprog_core::metrics::{alpha_lambda_sweep, SweepOptions, SweepPoint};
use evoprog_core::tuning::{build_reference, pick_best, score_lags, LagScore, LagSelection, ValidationOptions};
use evoprog_core::Prognoser;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Algorithm, ExperimentConfig};
use crate::dataio::{load_capacity, Battery};
use crate::export;
use crate::snapshot::{ModelSnapshot, SNAPSHOT_SCHEMA};
use crate::synth;

/// Sweep and tuning outcome of one (battery, algorithm) pair.
#[derive(Debug, Clone)]
pub struct PairResult {
    pub battery: String,
    pub algorithm: Algorithm,
    pub lags: usize,
    pub failure_cycle: Option<u32>,
    pub selection: Option<LagSelection>,
    pub points: Vec<SweepPoint>,
}

/// All results plus the rendered files, keyed by path relative to the
/// output directory.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub pairs: Vec<PairResult>,
    pub files: BTreeMap<PathBuf, Vec<u8>>,
}

impl RunReport {
    pub fn pair(&self, battery: &str, algorithm: Algorithm) -> Option<&PairResult> {
        self.pairs.iter().find(|p| p.battery == battery && p.algorithm == algorithm)
    }

    /// Writes every file below `out_dir`, creating directories as needed.
    pub fn write_to(&self, out_dir: &Path) -> anyhow::Result<()> {
        for (rel, bytes) in &self.files {
            let path = out_dir.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

/// Loads (or synthesizes) one battery.
pub fn load_battery(config: &ExperimentConfig, id: &str) -> anyhow::Result<Battery> {
    if config.synthetic {
        let profile = synth::profile(id).ok_or_else(|| {
            let known: Vec<&str> = synth::PROFILES.iter().map(|p| p.id).collect();
            anyhow!("no synthetic profile for battery {id}; available: {}", known.join(", "))
        })?;
        return Ok(profile.battery(config.seed, config.rated_ah, config.eta));
    }
    let path = config.data_dir.join(format!("{id}.csv"));
    if !path.exists() {
        return Err(anyhow!(
            "battery file {} not found; place per-cycle `cycle,capacity_ah` CSVs named <battery>.csv in the data \
             directory (--data), or run with --synthetic",
            path.display()
        ));
    }
    Ok(load_capacity(&path, config.rated_ah, config.eta)?)
}

fn max_horizon(config: &ExperimentConfig, train_len: usize) -> usize {
    config.max_horizon.unwrap_or((5 * train_len).min(2000))
}

/// Lag search over the configured range, scored in parallel and reduced in
/// lag order.
fn tune(
    prognoser: &(dyn Prognoser + Sync),
    train: &[f64],
    unit: &[f64],
    opts: &ValidationOptions,
) -> anyhow::Result<LagSelection> {
    let head_len = opts.head_len();
    anyhow::ensure!(unit.len() >= head_len, "unit has {} samples, validation needs {head_len}", unit.len());
    let head = &unit[..head_len];
    let reference = build_reference(train, head, opts)?;
    let scores: Vec<LagScore> = (opts.min_lags..=opts.max_lags)
        .into_par_iter()
        .map(|l| score_lags(prognoser, train, head, &reference, l, opts))
        .collect();
    let lags = pick_best(&scores).ok_or_else(|| anyhow!("empty lag range"))?;
    Ok(LagSelection { lags, scores, reference })
}

fn run_pair(config: &ExperimentConfig, train: &Battery, unit: &Battery, algorithm: Algorithm) -> anyhow::Result<PairResult> {
    let prognoser = algorithm.prognoser();
    let train_hi = train.series.hi();
    let horizon = max_horizon(config, train_hi.len());
    let (lags, selection) = match config.fixed_lags.get(&algorithm) {
        Some(&l) => (l, None),
        None => {
            let mut opts = ValidationOptions::new(config.eta, train_hi.len());
            opts.min_lags = config.min_lags;
            opts.max_lags = algorithm.max_lags(config.max_lags).max(config.min_lags);
            opts.alpha = config.alpha();
            opts.max_horizon = horizon;
            let sel = tune(prognoser.as_ref(), train_hi, unit.series.hi(), &opts)
                .with_context(|| format!("tuning {} on {}", algorithm.name(), unit.id()))?;
            (sel.lags, Some(sel))
        }
    };
    let sweep = SweepOptions { alpha: config.alpha(), alpha_goal: config.alpha_goal, max_horizon: horizon };
    let points = alpha_lambda_sweep(prognoser.as_ref(), train_hi, &unit.series, &config.t_p, lags, &sweep);
    Ok(PairResult {
        battery: unit.id().to_owned(),
        algorithm,
        lags,
        failure_cycle: unit.series.failure_cycle(),
        selection,
        points,
    })
}

#[derive(Serialize)]
struct TuningReport<'a> {
    battery: &'a str,
    algorithm: &'static str,
    lags: usize,
    fixed: bool,
    selection: Option<&'a LagSelection>,
}

#[derive(Serialize)]
struct ForecastReport<'a> {
    battery: &'a str,
    algorithm: &'static str,
    lags: usize,
    t_p: u32,
    s_i: i64,
    confidence: f64,
    z: f64,
    rul: RulReport,
    degenerate_corr: bool,
    path: &'a evoprog_core::ForecastPath,
}

/// RUL in cycles from `t_P`.
#[derive(Serialize)]
struct RulReport {
    point: Option<i64>,
    lower: Option<i64>,
    upper: Option<i64>,
    true_rul: Option<u32>,
}

fn pair_files(config: &ExperimentConfig, pair: &PairResult, files: &mut BTreeMap<PathBuf, Vec<u8>>) -> anyhow::Result<()> {
    let dir = PathBuf::from(&pair.battery).join(pair.algorithm.name());
    let z = normal_quantile(1.0 - config.alpha() / 2.0);
    let tuning = TuningReport {
        battery: &pair.battery,
        algorithm: pair.algorithm.name(),
        lags: pair.lags,
        fixed: pair.selection.is_none(),
        selection: pair.selection.as_ref(),
    };
    files.insert(dir.join("tuning.json"), json_bytes(&tuning)?);
    let records: Vec<_> = pair.points.iter().map(|p| p.record.clone()).collect();
    files.insert(dir.join("alpha_lambda.csv"), export::alpha_lambda_csv(&records).into_bytes());

    for point in &pair.points {
        let Some(prognosis) = &point.prognosis else { continue };
        let r = &point.record;
        let stem = format!("tp{:03}", r.t_p);
        files.insert(dir.join(format!("forecast_{stem}.csv")), export::forecast_csv(&prognosis.path, r.s_i, z).into_bytes());
        let report = ForecastReport {
            battery: &pair.battery,
            algorithm: pair.algorithm.name(),
            lags: pair.lags,
            t_p: r.t_p,
            s_i: r.s_i,
            confidence: config.confidence,
            z,
            rul: RulReport { point: r.est_rul, lower: r.lower, upper: r.upper, true_rul: r.true_rul },
            degenerate_corr: prognosis.degenerate_corr,
            path: &prognosis.path,
        };
        files.insert(dir.join(format!("forecast_{stem}.json")), json_bytes(&report)?);
        let snapshot = ModelSnapshot {
            schema: SNAPSHOT_SCHEMA,
            algorithm: pair.algorithm.name().to_owned(),
            battery: pair.battery.clone(),
            lags: pair.lags,
            origin: r.s_i,
            fitted: prognosis.fitted.clone(),
        };
        files.insert(dir.join(format!("model_{stem}.json")), snapshot.to_json()?.into_bytes());
    }
    Ok(())
}

fn json_bytes<T: Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Summary rows: battery, algorithm, lags, failure cycle, then one cell per
/// `t_P`.
pub fn summary_rows(config: &ExperimentConfig, pairs: &[PairResult]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header: Vec<String> = ["battery", "algorithm", "lags", "fails_at"].map(String::from).to_vec();
    header.extend(config.t_p.iter().map(|t| format!("tp{t}")));
    let rows = pairs
        .iter()
        .map(|p| {
            let mut row = vec![
                p.battery.clone(),
                p.algorithm.name().to_owned(),
                p.lags.to_string(),
                p.failure_cycle.map_or_else(|| "-".into(), |c| c.to_string()),
            ];
            row.extend(p.points.iter().map(|pt| export::summary_cell(&pt.record)));
            row
        })
        .collect();
    (header, rows)
}

/// Runs the whole experiment in memory.
pub fn run(config: &ExperimentConfig) -> anyhow::Result<RunReport> {
    config.validate()?;
    let train = load_battery(config, &config.train_battery)?;
    let units = config
        .test_batteries
        .iter()
        .map(|id| load_battery(config, id))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let jobs: Vec<(&Battery, Algorithm)> =
        units.iter().flat_map(|u| config.algorithms.iter().map(move |&a| (u, a))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build()?;
    let pairs = pool.install(|| {
        jobs.par_iter()
            .map(|&(unit, algo)| run_pair(config, &train, unit, algo))
            .collect::<anyhow::Result<Vec<_>>>()
    })?;

    let mut files = BTreeMap::new();
    for pair in &pairs {
        pair_files(config, pair, &mut files)?;
    }
    let (header, rows) = summary_rows(config, &pairs);
    let mut csv = header.join(",");
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    files.insert(PathBuf::from("summary.csv"), csv.into_bytes());
    let mut text = format!(
        "Relative accuracy per prognosis start (train {}, confidence {}, threshold {})\n\n",
        config.train_battery, config.confidence, config.eta
    );
    text.push_str(&export::aligned_table(&header, &rows, 2));
    text.push_str("\n--  no RUL: the forecast never reaches the threshold\n*   not run: fewer samples than lags at the aligned start, or the unit already failed\n");
    files.insert(PathBuf::from("summary.txt"), text.into_bytes());
    files.insert(PathBuf::from("config.json"), json_bytes(config)?);
    Ok(RunReport { pairs, files })
}
