//! CSV and JSON serialization of results.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::run::{HistogramRecord, ResultRecord};

pub const CSV_HEADER: [&str; 7] = ["experiment", "parameter", "method", "estimate", "std_dev", "theory", "pass"];
pub const HISTOGRAM_HEADER: [&str; 4] = ["k", "empirical", "model1", "model2"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::invalid("format", format!("`{other}` is not csv or json"))),
        }
    }
}

fn ser_err(e: impl std::fmt::Display) -> Error {
    Error::Serialization(e.to_string())
}

/// Result table: one line per row of every record.
pub fn write_csv<W: Write>(records: &[ResultRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(ser_err)?;
    for rec in records {
        for r in &rec.rows {
            let theory = r.theory.map(|t| t.to_string()).unwrap_or_default();
            w.write_record([
                rec.experiment.as_str(),
                &r.parameter,
                &r.method,
                &r.estimate.to_string(),
                &r.std_dev.to_string(),
                &theory,
                if r.pass { "true" } else { "false" },
            ])
            .map_err(ser_err)?;
        }
    }
    w.flush().map_err(ser_err)
}

pub fn to_csv_string(records: &[ResultRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    String::from_utf8(buf).map_err(ser_err)
}

pub fn write_json<W: Write>(records: &[ResultRecord], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, records).map_err(ser_err)
}

pub fn from_json(text: &str) -> Result<Vec<ResultRecord>> {
    serde_json::from_str(text).map_err(ser_err)
}

/// `k, empirical, model1, model2`; a missing second model leaves its column empty.
pub fn write_histogram_csv<W: Write>(h: &HistogramRecord, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HISTOGRAM_HEADER).map_err(ser_err)?;
    let freqs = h.histogram.frequencies();
    let model = |i: usize, k: usize| h.models.get(i).and_then(|m| m.pmf.get(k)).map(f64::to_string).unwrap_or_default();
    for (k, f) in freqs.iter().enumerate() {
        w.write_record([k.to_string(), f.to_string(), model(0, k), model(1, k)]).map_err(ser_err)?;
    }
    w.flush().map_err(ser_err)
}

fn slug(s: &str) -> String {
    let mut out: String =
        s.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect();
    while out.contains("__") {
        out = out.replace("__", "_");
    }
    out.trim_matches('_').to_string()
}

/// Sibling path `<stem>.<experiment>.<case>.hist.csv` for each histogram.
pub fn histogram_paths(base: &Path, rec: &ResultRecord) -> Vec<PathBuf> {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    rec.histograms
        .iter()
        .map(|h| base.with_file_name(format!("{stem}.{}.{}.hist.csv", slug(&rec.experiment), slug(&h.parameter))))
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Write `records` to `path` (stdout when `None`); CSV output also writes
/// one histogram file per visit case next to `path`.
pub fn emit(records: &[ResultRecord], format: Format, path: Option<&Path>) -> Result<()> {
    let Some(path) = path else {
        let stdout = io::stdout();
        let lock = stdout.lock();
        return match format {
            Format::Csv => write_csv(records, lock),
            Format::Json => write_json(records, lock),
        };
    };
    let mut file = create(path)?;
    match format {
        Format::Csv => {
            write_csv(records, &mut file)?;
            for rec in records {
                for (h, p) in rec.histograms.iter().zip(histogram_paths(path, rec)) {
                    let mut f = create(&p)?;
                    write_histogram_csv(h, &mut f)?;
                    f.flush().map_err(|e| Error::io(&p, e))?;
                }
            }
        }
        Format::Json => write_json(records, &mut file)?,
    }
    file.flush().map_err(|e| Error::io(path, e))
}
