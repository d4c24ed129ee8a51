use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Datatype, Iri, Literal, ModelError, Namespace, Term, Triple, Vocabulary};

/// One measurement normalized to the canonical vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalObservation {
    pub id: Iri,
    pub sensor_id: Iri,
    pub property: Iri,
    pub value: f64,
    pub unit: Iri,
    pub timestamp: i64,
    pub lat: f64,
    pub lon: f64,
}

impl CanonicalObservation {
    /// Checks the record-level invariants, including the unit/property
    /// pairing against `vocab`.
    pub fn validate(&self, vocab: &Vocabulary) -> Result<(), ModelError> {
        if !self.value.is_finite() {
            return Err(ModelError::NonFinite);
        }
        if self.timestamp < 0 {
            return Err(ModelError::BadTimestamp(self.timestamp.to_string()));
        }
        check_lat_lon(self.lat, self.lon)?;
        match vocab.canonical_unit(&self.property) {
            None => Err(ModelError::UnknownProperty(self.property.to_string())),
            Some(u) if *u != self.unit => {
                Err(ModelError::UnitMismatch { property: self.property.to_string(), unit: self.unit.to_string() })
            }
            Some(_) => Ok(()),
        }
    }
}

pub fn check_lat_lon(lat: f64, lon: f64) -> Result<(), ModelError> {
    if !(-90.0..=90.0).contains(&lat) {
        return Err(ModelError::OutOfRange { field: "lat", value: lat });
    }
    if !(-180.0..=180.0).contains(&lon) {
        return Err(ModelError::OutOfRange { field: "lon", value: lon });
    }
    Ok(())
}

/// Local part of a sensor IRI used inside observation IRIs.
fn sensor_local_name<'a>(ns: &Namespace, sensor: &'a Iri) -> &'a str {
    let sensor_base = format!("{}sensor/", ns.base());
    match sensor.as_str().strip_prefix(sensor_base.as_str()) {
        Some(rest) if !rest.is_empty() => rest,
        _ => sensor.local_name(),
    }
}

/// Deterministic observation IRI: `<base>obs/<sensor-local-name>/<timestamp>`.
pub fn mint_observation_iri(ns: &Namespace, sensor_id: &Iri, timestamp: i64) -> Iri {
    ns.ex(&format!("obs/{}/{}", sensor_local_name(ns, sensor_id), timestamp))
}

/// Predicates of the observation template, in emission order.
struct ObservationPredicates {
    rdf_type: Iri,
    by_sensor: Iri,
    observed_property: Iri,
    has_value: Iri,
    has_unit: Iri,
    at_time: Iri,
    lat: Iri,
    lon: Iri,
    event_class: Iri,
}

impl ObservationPredicates {
    fn new(ns: &Namespace) -> Self {
        ObservationPredicates {
            rdf_type: ns.rdf("type"),
            by_sensor: ns.ex("bySensor"),
            observed_property: ns.ex("observedProperty"),
            has_value: ns.ex("hasValue"),
            has_unit: ns.ex("hasUnit"),
            at_time: ns.ex("atTime"),
            lat: ns.ex("lat"),
            lon: ns.ex("lon"),
            event_class: ns.ex("ObservationEvent"),
        }
    }
}

/// Fixed eight-triple rendering of an observation.
pub fn observation_to_triples(ns: &Namespace, obs: &CanonicalObservation) -> Result<Vec<Triple>, ModelError> {
    let p = ObservationPredicates::new(ns);
    let s = Term::Iri(obs.id.clone());
    let mk = |pred: &Iri, o: Term| Triple::new(s.clone(), pred.clone(), o);
    Ok(vec![
        mk(&p.rdf_type, Term::Iri(p.event_class.clone()))?,
        mk(&p.by_sensor, Term::Iri(obs.sensor_id.clone()))?,
        mk(&p.observed_property, Term::Iri(obs.property.clone()))?,
        mk(&p.has_value, Literal::double(obs.value)?.into())?,
        mk(&p.has_unit, Term::Iri(obs.unit.clone()))?,
        mk(&p.at_time, Literal::date_time(obs.timestamp)?.into())?,
        mk(&p.lat, Literal::double(obs.lat)?.into())?,
        mk(&p.lon, Literal::double(obs.lon)?.into())?,
    ])
}

/// Rebuilds the single observation described by `triples`.
pub fn triples_to_observation<'a>(
    ns: &Namespace,
    triples: impl IntoIterator<Item = &'a Triple>,
) -> Result<CanonicalObservation, ModelError> {
    let p = ObservationPredicates::new(ns);
    let triples: Vec<&Triple> = triples.into_iter().collect();

    let mut subjects: Vec<&Term> = triples
        .iter()
        .filter(|t| *t.predicate() == p.rdf_type && t.object().as_iri() == Some(&p.event_class))
        .map(|t| t.subject())
        .collect();
    subjects.sort();
    subjects.dedup();
    let id = match subjects.as_slice() {
        [] => return Err(ModelError::MissingField("rdf:type")),
        [Term::Iri(id)] => id.clone(),
        [other] => return Err(ModelError::InvalidIri(other.to_string())),
        many => return Err(ModelError::Ambiguous(many.len())),
    };

    let mut fields: BTreeMap<&Iri, &Term> = BTreeMap::new();
    for t in triples.iter().filter(|t| t.subject().as_iri() == Some(&id)) {
        fields.insert(t.predicate(), t.object());
    }
    let get = |pred: &Iri, name: &'static str| fields.get(pred).copied().ok_or(ModelError::MissingField(name));
    let iri = |pred: &Iri, name: &'static str| -> Result<Iri, ModelError> {
        get(pred, name)?.as_iri().cloned().ok_or_else(|| bad_literal(get(pred, name).ok()))
    };
    let double = |pred: &Iri, name: &'static str| -> Result<f64, ModelError> {
        let term = get(pred, name)?;
        term.as_literal().filter(|l| l.datatype() == Datatype::Double).and_then(Literal::as_f64).ok_or_else(|| bad_literal(Some(term)))
    };

    let time_term = get(&p.at_time, "atTime")?;
    let timestamp = time_term.as_literal().and_then(Literal::as_timestamp).ok_or_else(|| bad_literal(Some(time_term)))?;

    Ok(CanonicalObservation {
        sensor_id: iri(&p.by_sensor, "bySensor")?,
        property: iri(&p.observed_property, "observedProperty")?,
        value: double(&p.has_value, "hasValue")?,
        unit: iri(&p.has_unit, "hasUnit")?,
        timestamp,
        lat: double(&p.lat, "lat")?,
        lon: double(&p.lon, "lon")?,
        id,
    })
}

fn bad_literal(term: Option<&Term>) -> ModelError {
    match term {
        Some(Term::Literal(l)) => ModelError::BadLiteral { lexical: l.lexical().to_string(), datatype: l.datatype() },
        Some(other) => ModelError::BadLiteral { lexical: other.to_string(), datatype: Datatype::String },
        None => ModelError::MissingField("unknown"),
    }
}
