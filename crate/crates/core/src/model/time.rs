//! UTC timestamp helpers. All timestamps are whole seconds since the epoch.

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime};

use super::ModelError;

const FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

pub const DAY: i64 = 86_400;

/// `2023-01-01T00:00:00Z` style rendering.
pub fn format_utc(ts: i64) -> Result<String, ModelError> {
    DateTime::from_timestamp(ts, 0).map(|d| d.format(FORMAT).to_string()).ok_or(ModelError::BadTimestamp(ts.to_string()))
}

/// Parses ISO-8601 UTC with a mandatory `Z` suffix and no fractional seconds.
pub fn parse_utc(s: &str) -> Result<i64, ModelError> {
    NaiveDateTime::parse_from_str(s, FORMAT).map(|d| d.and_utc().timestamp()).map_err(|_| ModelError::BadTimestamp(s.to_string()))
}

/// Calendar (year, month) of a timestamp.
pub fn year_month(ts: i64) -> (i32, u32) {
    let d = DateTime::from_timestamp(ts, 0).unwrap_or_default();
    (d.year(), d.month())
}

/// Epoch seconds of the first instant of a calendar month.
pub fn month_start(year: i32, month: u32) -> Option<i64> {
    NaiveDate::from_ymd_opt(year, month, 1).and_then(|d| d.and_hms_opt(0, 0, 0)).map(|d| d.and_utc().timestamp())
}

/// Serde adapter storing epoch seconds as `YYYY-MM-DDTHH:MM:SSZ` text.
pub mod utc_text {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &i64, s: S) -> Result<S::Ok, S::Error> {
        let text = super::format_utc(*ts).map_err(serde::ser::Error::custom)?;
        s.serialize_str(&text)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<i64, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_utc(&text).map_err(D::Error::custom)
    }
}
