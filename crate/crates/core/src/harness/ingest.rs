//! Observable series from external state-vector tables.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::{potential, DEFAULT_CAP};

/// Reference state for the distance observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IngestTarget {
    /// A row of the table itself (0-based, header excluded).
    Row(usize),
    Vector(Vec<f64>),
}

impl std::str::FromStr for IngestTarget {
    type Err = Error;

    /// `row:<i>`, a bare integer (row index) or a comma-separated vector.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |reason: String| Error::invalid("target", reason);
        if let Some(i) = s.strip_prefix("row:") {
            return i.trim().parse().map(IngestTarget::Row).map_err(|e| bad(format!("{i}: {e}")));
        }
        if !s.contains(',') {
            if let Ok(i) = s.parse::<usize>() {
                return Ok(IngestTarget::Row(i));
            }
        }
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| bad(format!("{v}: {e}"))))
            .collect::<Result<Vec<_>>>()
            .map(IngestTarget::Vector)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    /// Coordinates taken modulo 1.
    Torus,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Metric::Euclidean),
            "torus" => Ok(Metric::Torus),
            other => Err(Error::invalid("metric", format!("`{other}` is not euclidean or torus"))),
        }
    }
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let sq: f64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let d = (x - y).abs();
                let d = match self {
                    Metric::Euclidean => d,
                    Metric::Torus => {
                        let f = d.rem_euclid(1.0);
                        f.min(1.0 - f)
                    }
                };
                d * d
            })
            .sum();
        sq.sqrt()
    }
}

/// Numeric rows of a comma-separated table; a non-numeric first line is a header.
pub fn read_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(_) => {
                let field = record.iter().find(|f| f.parse::<f64>().is_err()).unwrap_or_default();
                return Err(Error::Parse {
                    path: path.into(),
                    row: line,
                    reason: format!("non-numeric field `{field}`"),
                });
            }
        };
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse { path: path.into(), row: line, reason: format!("non-finite value {bad}") });
        }
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(Error::Parse {
                    path: path.into(),
                    row: line,
                    reason: format!("expected {w} fields, found {}", values.len()),
                })
            }
            _ => {}
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("series table"));
    }
    Ok(rows)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::Parse { path: path.into(), row, reason: format!("{kind:?}") },
    }
}

/// `−log d(row, target)` for every row of `rows`, capped at the default cap.
pub fn observable_series(rows: &[Vec<f64>], target: &IngestTarget, metric: Metric) -> Result<Vec<f64>> {
    let z: &[f64] = match target {
        IngestTarget::Row(i) => rows
            .get(*i)
            .ok_or_else(|| Error::invalid("target", format!("row {i} is beyond the {} data rows", rows.len())))?,
        IngestTarget::Vector(v) => v,
    };
    let width = rows.first().map_or(0, Vec::len);
    if z.len() != width {
        return Err(Error::DimensionMismatch { expected: width, got: z.len() });
    }
    Ok(rows.iter().map(|r| potential(metric.distance(r, z), DEFAULT_CAP)).collect())
}

/// Read `path` and return its observable series with respect to `target`.
pub fn ingest_series(path: &Path, target: &IngestTarget, metric: Metric) -> Result<Vec<f64>> {
    observable_series(&read_table(path)?, target, metric)
}

/// Fail on a constant series, which carries no exceedance structure.
pub fn require_variation(values: &[f64]) -> Result<()> {
    let first = values.first().ok_or(Error::EmptyInput("series"))?;
    if values.iter().all(|v| v == first) {
        return Err(Error::ZeroVariance);
    }
    Ok(())
}
