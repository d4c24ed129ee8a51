//! Complex event processing: windowed aggregates, trends, sequences and
//! absences, a textual rule language, and deterministic rule firing.

mod ast;
mod engine;
mod eval;
mod parser;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{format_duration, AggFn, CepRule, Cmp, KindRef, PatternExpr, WindowSpec};
pub use engine::{resolve_kind, Engine, Firing};
pub use eval::{slope, window_aggregate};
pub use parser::{check_rule, parse_duration, parse_rule, parse_ruleset, DEFAULT_SEVERITY};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CepError {
    #[error("syntax error at line {line}, column {column}: {expected}")]
    Syntax { line: usize, column: usize, expected: String },
    #[error("{0}")]
    Semantic(String),
    #[error("event at {got} arrived after {last}")]
    OutOfOrder { last: i64, got: i64 },
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("aggregate over an empty window")]
    EmptyWindow,
    #[error("slope needs at least two distinct timestamps")]
    Degenerate,
}

/// An item on the stream: a canonical observation (kind = property IRI),
/// an indigenous-knowledge observation, or a rule-emitted event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: String,
    pub timestamp: i64,
    pub value: Option<f64>,
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
}

impl Event {
    pub fn new(kind: impl Into<String>, timestamp: i64, value: Option<f64>) -> Self {
        Event { kind: kind.into(), timestamp, value, attributes: BTreeMap::new() }
    }

    pub fn with_attribute(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(key.into(), value.into());
        self
    }
}

/// Engine-assigned sequence number, unique per engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventId(pub u64);

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct StoredEvent {
    pub id: EventId,
    pub event: Event,
}
