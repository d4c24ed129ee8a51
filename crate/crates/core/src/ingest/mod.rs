//! Heterogeneous observation payloads (CSV, JSON, minimal XML) and their
//! alignment onto the canonical vocabulary.

mod align;
mod parse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use align::{canonicalize, convert_unit, AlignmentTable, SensorEntry, UnitEntry};
pub use parse::{parse_csv_line, parse_json_observation, parse_xml_observation, Column, CsvSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Csv,
    Json,
    Xml,
}

impl SourceFormat {
    pub fn parse(tag: &str) -> Option<Self> {
        match tag {
            "csv" => Some(SourceFormat::Csv),
            "json" => Some(SourceFormat::Json),
            "xml" => Some(SourceFormat::Xml),
            _ => None,
        }
    }
}

/// A payload split into fields, before any vocabulary alignment.
///
/// `lat_raw`/`lon_raw` may be empty; every other field is non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawObservation {
    pub source_format: SourceFormat,
    pub sensor_id_raw: String,
    pub property_raw: String,
    pub value_raw: String,
    pub unit_raw: String,
    pub timestamp_raw: String,
    pub lat_raw: String,
    pub lon_raw: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("expected {expected} columns, found {found}")]
    ColumnCount { expected: usize, found: usize },
    #[error("required field `{0}` is empty")]
    EmptyField(String),
    #[error("malformed payload: {0}")]
    Malformed(String),
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("key `{0}` has the wrong type")]
    WrongType(String),
    #[error("missing element <{0}>")]
    MissingElement(String),
    #[error("conversion produced a non-finite value")]
    NonFinite,
    #[error("unknown property term `{0}`")]
    UnknownTerm(String),
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("unit `{unit}` does not match the canonical unit of `{property}`")]
    UnitMismatch { property: String, unit: String },
    #[error("bad timestamp `{0}`")]
    BadTimestamp(String),
    #[error("bad number `{0}`")]
    BadNumber(String),
    #[error("{field} out of range: {value}")]
    OutOfRange { field: String, value: String },
    #[error("no location for sensor `{0}`")]
    MissingLocation(String),
    #[error("invalid alignment table: {0}")]
    InvalidTable(String),
}

impl IngestError {
    /// Stable error name used in replay summaries and HTTP bodies.
    pub fn name(&self) -> &'static str {
        match self {
            IngestError::ColumnCount { .. } => "ColumnCount",
            IngestError::EmptyField(_) => "EmptyField",
            IngestError::Malformed(_) => "Malformed",
            IngestError::MissingKey(_) => "MissingKey",
            IngestError::WrongType(_) => "WrongType",
            IngestError::MissingElement(_) => "MissingElement",
            IngestError::NonFinite => "NonFinite",
            IngestError::UnknownTerm(_) => "UnknownTerm",
            IngestError::UnknownUnit(_) => "UnknownUnit",
            IngestError::UnitMismatch { .. } => "UnitMismatch",
            IngestError::BadTimestamp(_) => "BadTimestamp",
            IngestError::BadNumber(_) => "BadNumber",
            IngestError::OutOfRange { .. } => "OutOfRange",
            IngestError::MissingLocation(_) => "MissingLocation",
            IngestError::InvalidTable(_) => "InvalidTable",
        }
    }

    /// The offending input, keyed by what it is (`term`, `unit`, ...).
    pub fn detail(&self) -> Option<(&'static str, String)> {
        match self {
            IngestError::UnknownTerm(t) => Some(("term", t.clone())),
            IngestError::UnknownUnit(u) => Some(("unit", u.clone())),
            IngestError::EmptyField(f) | IngestError::MissingKey(f) | IngestError::WrongType(f) => Some(("field", f.clone())),
            IngestError::MissingElement(e) => Some(("element", e.clone())),
            IngestError::BadTimestamp(t) => Some(("timestamp", t.clone())),
            IngestError::BadNumber(n) => Some(("value", n.clone())),
            IngestError::MissingLocation(s) => Some(("sensor", s.clone())),
            IngestError::OutOfRange { field, .. } => Some(("field", field.clone())),
            IngestError::UnitMismatch { unit, .. } => Some(("unit", unit.clone())),
            _ => None,
        }
    }
}
