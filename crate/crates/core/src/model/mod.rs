//! Unified ontology vocabulary, RDF-style terms and the canonical
//! observation record.

mod observation;
mod term;
pub mod time;
mod vocabulary;

use thiserror::Error;

pub use observation::{check_lat_lon, mint_observation_iri, observation_to_triples, triples_to_observation, CanonicalObservation};
pub use term::{canonical_double, Datatype, Iri, Literal, Namespace, Term, Triple, DEFAULT_BASE_IRI, RDF, RDFS, XSD};
pub use vocabulary::{OntologyCategory, Vocabulary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid IRI `{0}`")]
    InvalidIri(String),
    #[error("invalid blank node label `{0}`")]
    InvalidBlank(String),
    #[error("literal `{lexical}` is not a valid {datatype:?}")]
    BadLiteral { lexical: String, datatype: Datatype },
    #[error("value is not finite")]
    NonFinite,
    #[error("bad timestamp `{0}`")]
    BadTimestamp(String),
    #[error("{field} out of range: {value}")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("literal in subject position")]
    LiteralSubject,
    #[error("predicate `{0}` is not an IRI")]
    NonIriPredicate(String),
    #[error("missing field {0}")]
    MissingField(&'static str),
    #[error("{0} subjects typed as ObservationEvent")]
    Ambiguous(usize),
    #[error("property `{0}` already registered")]
    DuplicateProperty(String),
    #[error("unit `{0}` already canonical for `{1}`")]
    DuplicateUnit(String, String),
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("unit `{unit}` is not the canonical unit of `{property}`")]
    UnitMismatch { property: String, unit: String },
    #[error("class `{class}` already annotated as {existing}, cannot add {requested}")]
    CategoryConflict { class: String, existing: OntologyCategory, requested: OntologyCategory },
}
