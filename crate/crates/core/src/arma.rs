//! Non-evolving ARMA(p, q) baseline.
//!
//! AR terms are fitted by conditional least squares on the lagged design
//! matrix; MA terms, when requested, by the two-stage Hannan–Rissanen
//! regression. Forecast variances follow from the psi-weights of the
//! MA(∞) representation: `λ²_N = σ² Σ_{j<N} ψ_j²`.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::prognosis::ForecastPath;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ArmaModel {
    pub p: usize,
    pub q: usize,
    /// AR coefficients, `phi[i]` multiplies `x_{t−1−i}`.
    pub phi: Vec<f64>,
    /// MA coefficients, `theta_ma[j]` multiplies `e_{t−1−j}`.
    pub theta_ma: Vec<f64>,
    pub intercept: f64,
    /// Innovation variance.
    pub sigma2: f64,
    /// The normal equations were singular and a ridge was added.
    pub regularized: bool,
}

impl ArmaModel {
    /// One-step prediction given the most recent values and innovations,
    /// newest first.
    fn predict(&self, recent: &[f64], innovations: &[f64]) -> f64 {
        self.intercept
            + self.phi.iter().zip(recent).map(|(a, x)| a * x).sum::<f64>()
            + self.theta_ma.iter().zip(innovations).map(|(b, e)| b * e).sum::<f64>()
    }

    /// Psi-weights `ψ_0 … ψ_{n−1}`.
    pub fn psi_weights(&self, n: usize) -> Vec<f64> {
        let mut psi = Vec::with_capacity(n);
        for j in 0..n {
            let mut v = if j == 0 { 1.0 } else { self.theta_ma.get(j - 1).copied().unwrap_or(0.0) };
            for i in 1..=self.p.min(j) {
                v += self.phi[i - 1] * psi[j - i];
            }
            psi.push(v);
        }
        psi
    }
}

struct LeastSquares {
    coefs: Vec<f64>,
    intercept: f64,
    ssr: f64,
    regularized: bool,
}

/// Least squares with an intercept, solved on centered data. When the
/// centered normal matrix is numerically singular a ridge of `1e-8` times the
/// largest raw column sum of squares (not applied to the intercept) is added.
fn centered_least_squares(rows: &[Vec<f64>], targets: &[f64]) -> LeastSquares {
    let n = rows.len() as f64;
    let k = rows.first().map_or(0, Vec::len);
    let mut means = vec![0.0; k];
    for r in rows {
        for (m, v) in means.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let y_mean = targets.iter().sum::<f64>() / n;

    let mut normal = Matrix::zeros(k, k);
    let mut rhs = vec![0.0; k];
    for (r, y) in rows.iter().zip(targets) {
        let c: Vec<f64> = r.iter().zip(&means).map(|(v, m)| v - m).collect();
        normal.add_outer(1.0, &c, &c);
        for (b, ci) in rhs.iter_mut().zip(&c) {
            *b += ci * (y - y_mean);
        }
    }
    normal.symmetrize();

    // Pivots are judged against the raw (uncentered) regressor scale so that
    // rounding noise left by centering a constant column counts as zero.
    let raw_scale = (0..k)
        .map(|i| rows.iter().map(|r| r[i] * r[i]).sum::<f64>())
        .fold(0.0, f64::max);
    let well_posed = Cholesky::factor(&normal)
        .filter(|c| c.pivots().all(|p| p * p > 1e-12 * raw_scale));
    let (factor, regularized) = match well_posed {
        Some(c) => (c, false),
        None => {
            let scale = raw_scale.max(normal.trace() / k.max(1) as f64);
            let eps = if scale > 0.0 { 1e-8 * scale } else { 1e-8 };
            let mut reg = normal.clone();
            reg.add_diagonal(eps);
            (crate::linalg::regularized_cholesky(&reg).0, true)
        }
    };
    let coefs = factor.solve(&rhs);
    let intercept = y_mean - coefs.iter().zip(&means).map(|(a, m)| a * m).sum::<f64>();
    let ssr = rows
        .iter()
        .zip(targets)
        .map(|(r, y)| {
            let fit = intercept + coefs.iter().zip(r).map(|(a, v)| a * v).sum::<f64>();
            (y - fit) * (y - fit)
        })
        .sum();
    LeastSquares { coefs, intercept, ssr, regularized }
}

fn ar_design(segments: &[&[f64]], p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for seg in segments {
        for t in p..seg.len() {
            rows.push((1..=p).map(|i| seg[t - i]).collect());
            targets.push(seg[t]);
        }
    }
    (rows, targets)
}

/// Conditional least-squares AR(p) fit on a single series.
pub fn fit_ar(series: &[f64], p: usize) -> Result<ArmaModel> {
    fit_ar_segments(&[series], p)
}

/// AR(p) fit pooling lagged rows from several independent segments (rows
/// never straddle two segments).
pub fn fit_ar_segments(segments: &[&[f64]], p: usize) -> Result<ArmaModel> {
    if p == 0 {
        return Err(Error::InvalidLags { lags: 0 });
    }
    let (rows, targets) = ar_design(segments, p);
    let total: usize = segments.iter().map(|s| s.len()).sum();
    if rows.len() < 3 {
        return Err(Error::InsufficientData { needed: p + 3, got: total });
    }
    let ls = centered_least_squares(&rows, &targets);
    let dof = rows.len().saturating_sub(p + 1).max(1);
    Ok(ArmaModel {
        p,
        q: 0,
        phi: ls.coefs,
        theta_ma: Vec::new(),
        intercept: ls.intercept,
        sigma2: ls.ssr / dof as f64,
        regularized: ls.regularized,
    })
}

/// ARMA(p, q) via Hannan–Rissanen: a long AR fit supplies innovation
/// estimates, then `x_t` is regressed on its own lags and lagged innovations.
/// `q = 0` reduces to [`fit_ar_segments`].
pub fn fit_arma_segments(segments: &[&[f64]], p: usize, q: usize) -> Result<ArmaModel> {
    if q == 0 {
        return fit_ar_segments(segments, p);
    }
    if p == 0 {
        return Err(Error::InvalidLags { lags: 0 });
    }
    let longest = segments.iter().map(|s| s.len()).max().unwrap_or(0);
    let long_order = (p + q).max(10).min(longest / 4).max(p + q);
    let long = fit_ar_segments(segments, long_order)?;

    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for seg in segments {
        let mut innov = vec![f64::NAN; seg.len()];
        for t in long_order..seg.len() {
            let recent: Vec<f64> = (1..=long_order).map(|i| seg[t - i]).collect();
            innov[t] = seg[t] - long.predict(&recent, &[]);
        }
        for t in (long_order + q).max(p)..seg.len() {
            let mut row: Vec<f64> = (1..=p).map(|i| seg[t - i]).collect();
            row.extend((1..=q).map(|j| innov[t - j]));
            rows.push(row);
            targets.push(seg[t]);
        }
    }
    if rows.len() < p + q + 2 {
        return Err(Error::InsufficientData { needed: p + q + 2, got: rows.len() });
    }
    let ls = centered_least_squares(&rows, &targets);
    let dof = rows.len().saturating_sub(p + q + 1).max(1);
    Ok(ArmaModel {
        p,
        q,
        phi: ls.coefs[..p].to_vec(),
        theta_ma: ls.coefs[p..].to_vec(),
        intercept: ls.intercept,
        sigma2: ls.ssr / dof as f64,
        regularized: ls.regularized || long.regularized,
    })
}

/// Iterated forecast from the end of `history` with zero future innovations.
/// Past innovations for the MA part are reconstructed by running the model
/// over `history`.
pub fn forecast_arma(model: &ArmaModel, history: &[f64], max_horizon: usize) -> Result<ForecastPath> {
    if history.len() < model.p {
        return Err(Error::HistoryTooShort { needed: model.p, got: history.len() });
    }
    if max_horizon == 0 {
        return Err(Error::InvalidParameter("max_horizon must be at least 1"));
    }
    // Innovations, oldest first; zero before the model can be evaluated.
    let mut innov = vec![0.0; history.len()];
    for t in model.p..history.len() {
        let recent: Vec<f64> = (1..=model.p).map(|i| history[t - i]).collect();
        let past: Vec<f64> = (1..=model.q).map(|j| if t >= j { innov[t - j] } else { 0.0 }).collect();
        innov[t] = history[t] - model.predict(&recent, &past);
    }

    let mut values = history.to_vec();
    let mut means = Vec::with_capacity(max_horizon);
    for _ in 0..max_horizon {
        let t = values.len();
        let recent: Vec<f64> = (1..=model.p).map(|i| values[t - i]).collect();
        let past: Vec<f64> = (1..=model.q).map(|j| innov.get(t - j).copied().unwrap_or(0.0)).collect();
        let next = model.predict(&recent, &past);
        if !next.is_finite() {
            break;
        }
        values.push(next);
        means.push(next);
    }

    let psi = model.psi_weights(means.len());
    let mut acc = 0.0;
    let variances = psi
        .iter()
        .map(|w| {
            acc += w * w;
            model.sigma2 * acc
        })
        .collect();
    Ok(ForecastPath {
        means,
        variances,
        corr: Matrix::identity(model.p.max(1)),
        sigma_eps2: model.sigma2,
    })
}
