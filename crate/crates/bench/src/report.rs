//! CSV and JSON trial reports with a fixed column order.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::experiment::TrialRecord;
use crate::BenchError;

pub const COLUMNS: [&str; 11] = [
    "epsilon",
    "delta",
    "seed",
    "estimate",
    "truth",
    "success",
    "oracle_calls",
    "transition_calls",
    "reward_calls",
    "depth",
    "wall_time_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(BenchError::Invalid(format!("unknown report format {other:?}"))),
        }
    }
}

impl ReportFormat {
    /// `json` for a `.json` extension, `csv` otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

/// Renders records. Floats use the shortest decimal that parses back to the
/// same value; a missing truth or success is an empty CSV field or `null`.
pub fn render_report(records: &[TrialRecord], format: ReportFormat) -> Result<String, BenchError> {
    if records.is_empty() {
        return Err(BenchError::Invalid("no records to report".into()));
    }
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in records {
                w.serialize(r)?;
            }
            let bytes = w.into_inner().map_err(|e| BenchError::Csv(e.into_error().into()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(records)?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn emit_report(records: &[TrialRecord], format: ReportFormat, path: &Path) -> Result<(), BenchError> {
    let text = render_report(records, format)?;
    fs::write(path, text).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_report(text: &str, format: ReportFormat) -> Result<Vec<TrialRecord>, BenchError> {
    match format {
        ReportFormat::Csv => {
            let mut r = csv::Reader::from_reader(text.as_bytes());
            let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
            if header != COLUMNS {
                return Err(BenchError::Invalid(format!("unexpected report columns {header:?}")));
            }
            r.deserialize().map(|row| row.map_err(BenchError::from)).collect()
        }
        ReportFormat::Json => Ok(serde_json::from_str(text)?),
    }
}

pub fn read_report(path: &Path, format: Option<ReportFormat>) -> Result<Vec<TrialRecord>, BenchError> {
    let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_report(&text, format.unwrap_or_else(|| ReportFormat::from_path(path)))
}
