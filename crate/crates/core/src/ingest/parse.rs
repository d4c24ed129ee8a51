use quick_xml::events::Event as XmlEvent;
use quick_xml::Reader;
use serde_json::Value;

use super::{IngestError, RawObservation, SourceFormat};
use crate::model::canonical_double;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    SensorId,
    Property,
    Value,
    Unit,
    Timestamp,
    Lat,
    Lon,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::SensorId => "sensor_id",
            Column::Property => "property",
            Column::Value => "value",
            Column::Unit => "unit",
            Column::Timestamp => "timestamp",
            Column::Lat => "lat",
            Column::Lon => "lon",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [Column::SensorId, Column::Property, Column::Value, Column::Unit, Column::Timestamp, Column::Lat, Column::Lon]
            .into_iter()
            .find(|c| c.name() == s)
    }

    fn optional(self) -> bool {
        matches!(self, Column::Lat | Column::Lon)
    }
}

/// Column order of a CSV feed. Always names each of the seven columns once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    columns: Vec<Column>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            columns: vec![Column::SensorId, Column::Property, Column::Value, Column::Unit, Column::Timestamp, Column::Lat, Column::Lon],
        }
    }
}

impl CsvSchema {
    /// Builds a schema from a header such as `sensor_id,property,value,unit,timestamp,lat,lon`.
    pub fn from_header(header: &str) -> Result<Self, IngestError> {
        let mut columns = Vec::new();
        for name in header.split(',').map(str::trim) {
            let col = Column::from_name(name).ok_or_else(|| IngestError::Malformed(format!("unknown column `{name}`")))?;
            if columns.contains(&col) {
                return Err(IngestError::Malformed(format!("duplicate column `{name}`")));
            }
            columns.push(col);
        }
        if columns.len() != 7 {
            return Err(IngestError::ColumnCount { expected: 7, found: columns.len() });
        }
        Ok(CsvSchema { columns })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }
}

#[derive(Default)]
struct Fields {
    sensor: Option<String>,
    property: Option<String>,
    value: Option<String>,
    unit: Option<String>,
    timestamp: Option<String>,
    lat: Option<String>,
    lon: Option<String>,
}

impl Fields {
    fn slot(&mut self, c: Column) -> &mut Option<String> {
        match c {
            Column::SensorId => &mut self.sensor,
            Column::Property => &mut self.property,
            Column::Value => &mut self.value,
            Column::Unit => &mut self.unit,
            Column::Timestamp => &mut self.timestamp,
            Column::Lat => &mut self.lat,
            Column::Lon => &mut self.lon,
        }
    }

    /// `missing` maps a column to the error reported when it is absent.
    fn finish(mut self, format: SourceFormat, missing: impl Fn(Column) -> IngestError) -> Result<RawObservation, IngestError> {
        let mut take = |c: Column| -> Result<String, IngestError> {
            match self.slot(c).take() {
                Some(v) if v.is_empty() && !c.optional() => Err(IngestError::EmptyField(c.name().to_string())),
                Some(v) => Ok(v),
                None if c.optional() => Ok(String::new()),
                None => Err(missing(c)),
            }
        };
        Ok(RawObservation {
            source_format: format,
            sensor_id_raw: take(Column::SensorId)?,
            property_raw: take(Column::Property)?,
            value_raw: take(Column::Value)?,
            unit_raw: take(Column::Unit)?,
            timestamp_raw: take(Column::Timestamp)?,
            lat_raw: take(Column::Lat)?,
            lon_raw: take(Column::Lon)?,
        })
    }
}

/// Splits one CSV record. Quoting is not supported, so embedded commas
/// surface as a column-count error.
pub fn parse_csv_line(line: &str, schema: &CsvSchema) -> Result<RawObservation, IngestError> {
    let line = line.trim_end_matches(['\r', '\n']);
    if line.contains('"') {
        return Err(IngestError::Malformed("quoted CSV fields are not supported".into()));
    }
    let parts: Vec<&str> = line.split(',').collect();
    if parts.len() != schema.columns.len() {
        return Err(IngestError::ColumnCount { expected: schema.columns.len(), found: parts.len() });
    }
    let mut fields = Fields::default();
    for (col, part) in schema.columns.iter().zip(parts) {
        *fields.slot(*col) = Some(part.trim().to_string());
    }
    fields.finish(SourceFormat::Csv, |c| IngestError::EmptyField(c.name().to_string()))
}

/// Reads a single JSON observation object. Numbers are rendered in
/// canonical lexical form; numeric strings pass through unchanged.
pub fn parse_json_observation(document: &str) -> Result<RawObservation, IngestError> {
    let value: Value = serde_json::from_str(document).map_err(|e| IngestError::Malformed(e.to_string()))?;
    let Value::Object(map) = value else {
        return Err(IngestError::WrongType("document".into()));
    };
    let mut fields = Fields::default();
    for col in [Column::SensorId, Column::Property, Column::Value, Column::Unit, Column::Timestamp, Column::Lat, Column::Lon] {
        let Some(v) = map.get(col.name()) else { continue };
        let text = match v {
            Value::String(s) => s.trim().to_string(),
            Value::Number(n) => match n.as_f64() {
                Some(x) if x.is_finite() => canonical_double(x),
                _ => return Err(IngestError::BadNumber(n.to_string())),
            },
            _ => return Err(IngestError::WrongType(col.name().to_string())),
        };
        *fields.slot(col) = Some(text);
    }
    fields.finish(SourceFormat::Json, |c| IngestError::MissingKey(c.name().to_string()))
}

fn xml_column(name: &[u8]) -> Option<Column> {
    match name {
        b"procedure" => Some(Column::SensorId),
        b"observedProperty" => Some(Column::Property),
        b"result" => Some(Column::Value),
        b"time" => Some(Column::Timestamp),
        b"lat" => Some(Column::Lat),
        b"lon" => Some(Column::Lon),
        _ => None,
    }
}

fn xml_element(c: Column) -> &'static str {
    match c {
        Column::SensorId => "procedure",
        Column::Property => "observedProperty",
        Column::Value | Column::Unit => "result",
        Column::Timestamp => "time",
        Column::Lat => "lat",
        Column::Lon => "lon",
    }
}

fn uom_attribute(e: &quick_xml::events::BytesStart<'_>) -> Result<String, IngestError> {
    let attr = e.try_get_attribute("uom").map_err(|e| IngestError::Malformed(e.to_string()))?;
    match attr {
        Some(a) => a.unescape_value().map(|v| v.trim().to_string()).map_err(|e| IngestError::Malformed(e.to_string())),
        None => Ok(String::new()),
    }
}

fn set_once(fields: &mut Fields, c: Column, v: String) -> Result<(), IngestError> {
    let slot = fields.slot(c);
    if slot.is_some() {
        return Err(IngestError::Malformed(format!("duplicate <{}>", xml_element(c))));
    }
    *slot = Some(v);
    Ok(())
}

/// Extracts the minimal `<Observation>` element set. Unknown elements are
/// skipped wherever they appear.
pub fn parse_xml_observation(document: &str) -> Result<RawObservation, IngestError> {
    let mut reader = Reader::from_str(document);
    reader.config_mut().trim_text(true);

    let mut fields = Fields::default();
    let mut depth = 0usize;
    let mut seen_root = false;
    // Known child currently open directly under the root.
    let mut current: Option<Column> = None;

    loop {
        let event = reader.read_event().map_err(|e| IngestError::Malformed(e.to_string()))?;
        match event {
            XmlEvent::Start(ref e) | XmlEvent::Empty(ref e) if depth == 0 => {
                if seen_root || e.name().as_ref() != b"Observation" {
                    return Err(IngestError::Malformed("root element must be a single <Observation>".into()));
                }
                seen_root = true;
                if matches!(event, XmlEvent::Start(_)) {
                    depth = 1;
                }
            }
            XmlEvent::Start(ref e) | XmlEvent::Empty(ref e) => {
                let is_start = matches!(event, XmlEvent::Start(_));
                if depth == 1 {
                    let col = xml_column(e.name().as_ref());
                    if let Some(c) = col {
                        if c == Column::Value {
                            set_once(&mut fields, Column::Unit, uom_attribute(e)?)?;
                        }
                        set_once(&mut fields, c, String::new())?;
                    }
                    if is_start {
                        current = col;
                    }
                }
                if is_start {
                    depth += 1;
                }
            }
            XmlEvent::Text(t) => {
                if depth == 0 {
                    return Err(IngestError::Malformed("text outside <Observation>".into()));
                }
                if depth == 2 {
                    if let Some(c) = current {
                        let text = t.unescape().map_err(|e| IngestError::Malformed(e.to_string()))?;
                        fields.slot(c).get_or_insert_with(String::new).push_str(text.trim());
                    }
                }
            }
            XmlEvent::End(_) => {
                depth = depth.checked_sub(1).ok_or_else(|| IngestError::Malformed("unbalanced end tag".into()))?;
                if depth == 1 {
                    current = None;
                }
            }
            XmlEvent::Eof => break,
            _ => {}
        }
    }
    if !seen_root {
        return Err(IngestError::Malformed("no <Observation> element".into()));
    }
    if depth != 0 {
        return Err(IngestError::Malformed("unterminated <Observation>".into()));
    }
    fields.finish(SourceFormat::Xml, |c| IngestError::MissingElement(xml_element(c).to_string()))
}
