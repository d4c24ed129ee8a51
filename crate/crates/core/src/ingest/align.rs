use std::collections::{BTreeMap, HashMap};

use serde::Deserialize;

use super::{IngestError, RawObservation};
use crate::model::{check_lat_lon, mint_observation_iri, time, CanonicalObservation, Iri, ModelError, Vocabulary};

/// `canonical = raw * scale + offset`, expressed in `iri`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitEntry {
    pub iri: Iri,
    pub scale: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorEntry {
    pub iri: Iri,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
}

/// Maps raw vocabulary onto the canonical one. Keys are matched
/// case-insensitively after trimming.
#[derive(Debug, Clone)]
pub struct AlignmentTable {
    vocab: Vocabulary,
    terms: HashMap<String, Iri>,
    units: HashMap<String, UnitEntry>,
    sensors: HashMap<String, SensorEntry>,
}

fn key(raw: &str) -> String {
    raw.trim().to_lowercase()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    #[serde(default)]
    terms: BTreeMap<String, String>,
    #[serde(default)]
    units: BTreeMap<String, UnitFile>,
    #[serde(default)]
    sensors: BTreeMap<String, SensorFile>,
}

#[derive(Deserialize)]
struct UnitFile {
    iri: String,
    scale: f64,
    #[serde(default)]
    offset: f64,
}

#[derive(Deserialize)]
struct SensorFile {
    iri: Option<String>,
    lat: Option<f64>,
    lon: Option<f64>,
}

fn invalid(e: impl std::fmt::Display) -> IngestError {
    IngestError::InvalidTable(e.to_string())
}

impl AlignmentTable {
    pub fn new(vocab: Vocabulary) -> Self {
        AlignmentTable { vocab, terms: HashMap::new(), units: HashMap::new(), sensors: HashMap::new() }
    }

    /// Loads the JSON alignment file (`terms`, `units`, `sensors`).
    pub fn from_json(text: &str, vocab: Vocabulary) -> Result<Self, IngestError> {
        let file: TableFile = serde_json::from_str(text).map_err(invalid)?;
        let ns = vocab.namespace().clone();
        let mut table = AlignmentTable::new(vocab);
        for (raw, target) in file.terms {
            table.add_term(&raw, ns.expand(&target).map_err(invalid)?)?;
        }
        for (raw, u) in file.units {
            table.add_unit(&raw, UnitEntry { iri: ns.expand(&u.iri).map_err(invalid)?, scale: u.scale, offset: u.offset })?;
        }
        for (raw, s) in file.sensors {
            let iri = match s.iri {
                Some(i) => ns.expand(&i).map_err(invalid)?,
                None => table.default_sensor_iri(&raw),
            };
            table.add_sensor(&raw, SensorEntry { iri, lat: s.lat, lon: s.lon })?;
        }
        Ok(table)
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn add_term(&mut self, raw: &str, property: Iri) -> Result<(), IngestError> {
        if !self.vocab.is_property(&property) {
            return Err(invalid(format!("term `{raw}` maps to non-canonical property `{property}`")));
        }
        insert_unique(&mut self.terms, raw, property)
    }

    pub fn add_unit(&mut self, raw: &str, entry: UnitEntry) -> Result<(), IngestError> {
        if entry.scale == 0.0 || !entry.scale.is_finite() || !entry.offset.is_finite() {
            return Err(invalid(format!("unit `{raw}` needs a finite non-zero scale and finite offset")));
        }
        if !self.vocab.is_canonical_unit(&entry.iri) {
            return Err(invalid(format!("unit `{raw}` maps to non-canonical unit `{}`", entry.iri)));
        }
        insert_unique(&mut self.units, raw, entry)
    }

    pub fn add_sensor(&mut self, raw: &str, entry: SensorEntry) -> Result<(), IngestError> {
        if let (Some(lat), Some(lon)) = (entry.lat, entry.lon) {
            check_lat_lon(lat, lon).map_err(invalid)?;
        }
        insert_unique(&mut self.sensors, raw, entry)
    }

    pub fn property(&self, raw: &str) -> Option<&Iri> {
        self.terms.get(&key(raw))
    }

    pub fn unit(&self, raw: &str) -> Option<&UnitEntry> {
        self.units.get(&key(raw))
    }

    pub fn sensor(&self, raw: &str) -> Option<&SensorEntry> {
        self.sensors.get(&key(raw))
    }

    /// Sensor IRI for a raw id: the table entry, else `<base>sensor/<id>`.
    pub fn sensor_iri(&self, raw: &str) -> Iri {
        self.sensor(raw).map(|s| s.iri.clone()).unwrap_or_else(|| self.default_sensor_iri(raw))
    }

    fn default_sensor_iri(&self, raw: &str) -> Iri {
        let mut local = String::new();
        for b in raw.trim().bytes() {
            if b.is_ascii_alphanumeric() || b"-_.~".contains(&b) {
                local.push(b as char);
            } else {
                local.push_str(&format!("%{b:02X}"));
            }
        }
        self.vocab.namespace().ex(&format!("sensor/{local}"))
    }
}

fn insert_unique<V>(map: &mut HashMap<String, V>, raw: &str, v: V) -> Result<(), IngestError> {
    let k = key(raw);
    if k.is_empty() {
        return Err(invalid("empty key"));
    }
    if map.contains_key(&k) {
        return Err(invalid(format!("duplicate entry `{raw}` (keys are case-insensitive)")));
    }
    map.insert(k, v);
    Ok(())
}

/// Applies a unit entry: `value * scale + offset`.
pub fn convert_unit(value: f64, entry: &UnitEntry) -> Result<f64, IngestError> {
    let out = value * entry.scale + entry.offset;
    if out.is_finite() {
        Ok(out)
    } else {
        Err(IngestError::NonFinite)
    }
}

fn parse_number(s: &str) -> Result<f64, IngestError> {
    match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x + 0.0),
        _ => Err(IngestError::BadNumber(s.to_string())),
    }
}

fn coordinate(raw: &str, station: Option<f64>, field: &str, sensor: &str, bound: f64) -> Result<f64, IngestError> {
    let v =
        if raw.trim().is_empty() { station.ok_or_else(|| IngestError::MissingLocation(sensor.to_string()))? } else { parse_number(raw)? };
    if !(-bound..=bound).contains(&v) {
        return Err(IngestError::OutOfRange { field: field.to_string(), value: raw.to_string() });
    }
    Ok(v + 0.0)
}

/// Resolves a raw observation against the alignment table.
pub fn canonicalize(raw: &RawObservation, table: &AlignmentTable) -> Result<CanonicalObservation, IngestError> {
    let property = table.property(&raw.property_raw).ok_or_else(|| IngestError::UnknownTerm(raw.property_raw.clone()))?;
    let unit = table.unit(&raw.unit_raw).ok_or_else(|| IngestError::UnknownUnit(raw.unit_raw.clone()))?;
    if table.vocab.canonical_unit(property) != Some(&unit.iri) {
        return Err(IngestError::UnitMismatch { property: property.to_string(), unit: raw.unit_raw.clone() });
    }
    let value = convert_unit(parse_number(&raw.value_raw)?, unit)? + 0.0;
    let timestamp = time::parse_utc(raw.timestamp_raw.trim()).map_err(|e| match e {
        ModelError::BadTimestamp(s) => IngestError::BadTimestamp(s),
        other => IngestError::BadTimestamp(other.to_string()),
    })?;
    if timestamp < 0 {
        return Err(IngestError::BadTimestamp(raw.timestamp_raw.clone()));
    }
    let station = table.sensor(&raw.sensor_id_raw);
    let sensor_raw = raw.sensor_id_raw.trim();
    let lat = coordinate(&raw.lat_raw, station.and_then(|s| s.lat), "lat", sensor_raw, 90.0)?;
    let lon = coordinate(&raw.lon_raw, station.and_then(|s| s.lon), "lon", sensor_raw, 180.0)?;
    let sensor_id = table.sensor_iri(sensor_raw);
    Ok(CanonicalObservation {
        id: mint_observation_iri(table.vocab.namespace(), &sensor_id, timestamp),
        sensor_id,
        property: property.clone(),
        value,
        unit: unit.iri.clone(),
        timestamp,
        lat,
        lon,
    })
}
