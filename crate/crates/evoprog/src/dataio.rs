//! Battery capacity CSV input and output.
//!
//! The canonical file has the header `cycle,capacity_ah` and one row per
//! discharge cycle with strictly increasing cycle numbers. Capacities are
//! converted to a percentage health index of the rated capacity.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use evoprog_core::DegradationSeries;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
}

/// Raw capacities of one battery together with the derived health index.
#[derive(Debug, Clone, PartialEq)]
pub struct Battery {
    pub capacity_ah: Vec<f64>,
    pub rated_ah: f64,
    pub series: DegradationSeries,
}

impl Battery {
    pub fn from_capacity(
        id: &str,
        cycles: Vec<u32>,
        capacity_ah: Vec<f64>,
        rated_ah: f64,
        eta: f64,
    ) -> evoprog_core::Result<Self> {
        let hi = capacity_ah.iter().map(|c| 100.0 * c / rated_ah).collect();
        let series = DegradationSeries::new(id, cycles, hi, eta)?;
        Ok(Self { capacity_ah, rated_ah, series })
    }

    pub fn id(&self) -> &str {
        self.series.battery_id()
    }
}

const HEADER: [&str; 2] = ["cycle", "capacity_ah"];

/// Reads `path`; the battery id is the file stem.
pub fn load_capacity(path: &Path, rated_ah: f64, eta: f64) -> Result<Battery, DataError> {
    let file = File::open(path).map_err(|source| DataError::Io { path: path.to_owned(), source })?;
    let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("battery");
    parse_capacity(file, path, id, rated_ah, eta)
}

/// Parses capacity CSV from `reader`; `path` is only used in messages.
pub fn parse_capacity(
    reader: impl Read,
    path: &Path,
    id: &str,
    rated_ah: f64,
    eta: f64,
) -> Result<Battery, DataError> {
    let schema = |message: String| DataError::Schema { path: path.to_owned(), message };
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv.headers().map_err(|e| schema(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(schema(format!("expected header `{}`, found `{}`", HEADER.join(","), headers.iter().collect::<Vec<_>>().join(","))));
    }
    if !(rated_ah > 0.0 && rated_ah.is_finite()) {
        return Err(schema(format!("rated capacity must be positive, got {rated_ah}")));
    }

    let mut cycles = Vec::new();
    let mut capacity = Vec::new();
    for row in csv.deserialize::<(u32, f64)>() {
        let (cycle, cap) = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            DataError::Parse { path: path.to_owned(), line, message: e.to_string() }
        })?;
        let line = cycles.len() as u64 + 2;
        if !cap.is_finite() {
            return Err(DataError::Parse { path: path.to_owned(), line, message: format!("non-finite capacity {cap}") });
        }
        if cycles.last().is_some_and(|&prev| cycle <= prev) {
            return Err(schema(format!("line {line}: cycle {cycle} does not increase")));
        }
        let hi = 100.0 * cap / rated_ah;
        if !(hi > 0.0 && hi <= 120.0) {
            return Err(schema(format!("line {line}: capacity {cap} Ah is {hi}% of rated, outside (0, 120]")));
        }
        cycles.push(cycle);
        capacity.push(cap);
    }
    if cycles.is_empty() {
        return Err(schema("no data rows".into()));
    }
    Battery::from_capacity(id, cycles, capacity, rated_ah, eta).map_err(|e| schema(e.to_string()))
}

/// Writes `battery` in the canonical CSV format.
pub fn write_capacity(writer: impl Write, battery: &Battery) -> csv::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(HEADER)?;
    for (cycle, cap) in battery.series.cycles().iter().zip(&battery.capacity_ah) {
        csv.write_record([cycle.to_string(), cap.to_string()])?;
    }
    csv.flush()?;
    Ok(())
}
