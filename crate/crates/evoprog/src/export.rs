//! Text renderings of experiment results. Every float is written with
//! Rust's shortest round-trip formatting so reruns are byte-identical.

use std::fmt::Write as _;

use evoprog_core::metrics::{AlphaLambdaRecord, Outcome, SkipReason};
use evoprog_core::prognosis::ForecastPath;

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

pub fn status(outcome: &Outcome) -> &'static str {
    match outcome {
        Outcome::Estimated => "estimated",
        Outcome::Infeasible => "infeasible",
        Outcome::Failed(_) => "failed",
        Outcome::Skipped(SkipReason::NotEnoughLags) => "skipped_lags",
        Outcome::Skipped(SkipReason::PastFailure) => "skipped_failed",
        Outcome::Skipped(SkipReason::BeyondData) => "skipped_beyond_data",
    }
}

/// Summary cell: RA with four decimals, `--` when no RUL could be given,
/// `*` when the point was not run, `n/a` when the unit never fails.
pub fn summary_cell(record: &AlphaLambdaRecord) -> String {
    match (&record.outcome, record.ra) {
        (Outcome::Skipped(_), _) => "*".into(),
        (Outcome::Infeasible | Outcome::Failed(_), _) => "--".into(),
        (Outcome::Estimated, Some(ra)) => format!("{ra:.4}"),
        (Outcome::Estimated, None) => "n/a".into(),
    }
}

/// One row per `t_P`.
pub fn alpha_lambda_csv(records: &[AlphaLambdaRecord]) -> String {
    let mut out = String::from("t_p,s_i,true_rul,status,est_rul,lower,upper,ra,mape,in_goal,error\n");
    for r in records {
        let error = match &r.outcome {
            Outcome::Failed(e) => e.to_string().replace(',', ";"),
            _ => String::new(),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.t_p,
            r.s_i,
            opt(r.true_rul),
            status(&r.outcome),
            opt(r.est_rul),
            opt(r.lower),
            opt(r.upper),
            opt(r.ra),
            opt(r.mape),
            r.in_goal,
            error
        )
        .expect("writing to a String");
    }
    out
}

/// Forecast trace: step `N`, cycle `origin + N`, mean, variance and the
/// `mean ∓ z ν` band.
pub fn forecast_csv(path: &ForecastPath, origin: i64, z: f64) -> String {
    let mut out = String::from("n,cycle,mean,variance,lower_band,upper_band\n");
    for (n, ((mean, var), (lo, hi))) in path.means.iter().zip(&path.variances).zip(path.bands(z)).enumerate() {
        let step = n + 1;
        writeln!(out, "{step},{},{mean},{var},{lo},{hi}", origin + step as i64).expect("writing to a String");
    }
    out
}

/// Left-aligned first columns, right-aligned numeric columns.
pub fn aligned_table(header: &[String], rows: &[Vec<String>], left_cols: usize) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, &w))| if c < left_cols { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}
