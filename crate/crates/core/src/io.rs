//! CSV and JSON serialization.
//!
//! Reals are written as the shortest decimal that parses back to the same double, so
//! every written file round-trips exactly. A vacuous bound is written as `NaN`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{AggregateRow, ExperimentConfig, ExperimentRecord};

pub const RECORDS_HEADER: &str = "h,trial,cv,risk,in_xi,skipped_count";
pub const AGGREGATES_HEADER: &str =
    "h,mean_cv,mean_risk,q05_cv,q95_cv,q05_risk,q95_risk,q90_absdiff,gamma,eps_risk,eps_cv,eps_diff";
pub const EVENT_HEADER: &str = "h,empirical,gamma_upper,gamma_gumbel";

/// One point of the mesh-norm event curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub h: f64,
    pub empirical: f64,
    pub gamma_upper: f64,
    pub gamma_gumbel: f64,
}

/// Index written next to figure CSVs; file names are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub which: String,
    pub files: BTreeMap<String, String>,
    pub config: ExperimentConfig,
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("{other:?}")),
        }
    }
}

/// Header line first (even with no rows), `\n` line endings.
fn to_csv<T: Serialize>(header: &str, rows: &[T]) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header.split(','))
        .expect("writing to memory");
    for r in rows {
        w.serialize(r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV output is UTF-8")
}

fn from_csv<T: DeserializeOwned>(header: &str, text: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let found = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if found != header {
        return Err(Error::Parse(format!(
            "expected header '{header}', found '{found}'"
        )));
    }
    r.deserialize().map(|row| Ok(row?)).collect()
}

pub fn records_to_csv(records: &[ExperimentRecord]) -> String {
    to_csv(RECORDS_HEADER, records)
}

pub fn aggregates_to_csv(rows: &[AggregateRow]) -> String {
    to_csv(AGGREGATES_HEADER, rows)
}

pub fn events_to_csv(rows: &[EventRow]) -> String {
    to_csv(EVENT_HEADER, rows)
}

pub fn parse_records_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    from_csv(RECORDS_HEADER, text)
}

pub fn parse_aggregates_csv(text: &str) -> Result<Vec<AggregateRow>> {
    from_csv(AGGREGATES_HEADER, text)
}

pub fn parse_events_csv(text: &str) -> Result<Vec<EventRow>> {
    from_csv(EVENT_HEADER, text)
}

pub fn write_records_csv(records: &[ExperimentRecord], path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, records_to_csv(records))?)
}

pub fn write_aggregates_csv(rows: &[AggregateRow], path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, aggregates_to_csv(rows))?)
}

pub fn write_events_csv(rows: &[EventRow], path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, events_to_csv(rows))?)
}

pub fn read_records_csv(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    parse_records_csv(&fs::read_to_string(path)?)
}

pub fn read_aggregates_csv(path: impl AsRef<Path>) -> Result<Vec<AggregateRow>> {
    parse_aggregates_csv(&fs::read_to_string(path)?)
}

pub fn read_events_csv(path: impl AsRef<Path>) -> Result<Vec<EventRow>> {
    parse_events_csv(&fs::read_to_string(path)?)
}

/// Reads an [`ExperimentConfig`] JSON document. Missing fields take their defaults.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_manifest(manifest: &Manifest, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    Ok(fs::write(path, text)?)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(h: f64, trial: u64) -> ExperimentRecord {
        ExperimentRecord {
            h,
            trial,
            cv: 0.1 + h * 1e-7,
            risk: 1.0 / 3.0,
            in_xi: trial.is_multiple_of(2),
            skipped_count: 1,
        }
    }

    #[test]
    fn empty_records_give_header_only() {
        assert_eq!(records_to_csv(&[]), format!("{RECORDS_HEADER}\n"));
        assert_eq!(aggregates_to_csv(&[]), format!("{AGGREGATES_HEADER}\n"));
    }

    #[test]
    fn one_record_gives_two_lines() {
        let text = records_to_csv(&[record(50.0, 3)]);
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n'));
        assert!(text.lines().nth(1).unwrap().starts_with("50.0,3,"));
    }

    #[test]
    fn records_round_trip() {
        let recs: Vec<_> = (0..20).map(|t| record(17.25 + t as f64 / 7.0, t)).collect();
        assert_eq!(parse_records_csv(&records_to_csv(&recs)).unwrap(), recs);
    }

    #[test]
    fn nan_survives_as_text() {
        let row = AggregateRow {
            h: 1.0,
            mean_cv: 0.5,
            mean_risk: 0.25,
            q05_cv: 0.1,
            q95_cv: 0.9,
            q05_risk: 0.05,
            q95_risk: 0.45,
            q90_absdiff: 1e-300,
            gamma: 0.0,
            eps_risk: f64::NAN,
            eps_cv: f64::NAN,
            eps_diff: f64::NAN,
        };
        let text = aggregates_to_csv(&[row]);
        assert!(text.contains(",NaN,NaN,NaN\n"));
        let back = parse_aggregates_csv(&text).unwrap();
        assert_eq!(back[0].q90_absdiff, 1e-300);
        assert!(back[0].eps_diff.is_nan());
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(parse_records_csv("h,trial\n").is_err());
        assert!(parse_records_csv(&format!("{RECORDS_HEADER}\n1,2,3\n")).is_err());
    }
}
