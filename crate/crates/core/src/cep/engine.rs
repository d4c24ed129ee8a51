use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ast::{CepRule, KindRef};
use super::eval::evaluate;
use super::{check_rule, CepError, Event, EventId, StoredEvent};
use crate::model::Namespace;

/// One rule firing at a window end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Firing {
    pub rule: String,
    pub window_end: i64,
    pub event: Event,
    pub event_id: EventId,
    pub evidence: Vec<EventId>,
}

/// Time-driven CEP engine for a single ordered stream.
///
/// Windows end on multiples of the rule's step (or length, for tumbling
/// windows) and cover `(end - length, end]`. A window end is evaluated
/// once the stream has moved past it, or on [`Engine::advance_to`].
/// Events a rule emits at `end` become visible to windows ending later.
#[derive(Debug, Clone)]
pub struct Engine {
    rules: Vec<CepRule>,
    next_end: Vec<Option<i64>>,
    buffer: Vec<StoredEvent>,
    next_id: u64,
    last_ts: Option<i64>,
    sealed: Option<i64>,
    max_length: i64,
    emit_attributes: BTreeMap<String, String>,
}

impl Engine {
    /// Kinds are matched exactly as written.
    pub fn new(rules: Vec<CepRule>) -> Result<Self, CepError> {
        Self::with_resolver(rules, |k| k.as_str().to_string())
    }

    /// Prefixed kinds (`ex:soilMoisture`) are expanded through `ns`, so
    /// they match events keyed by full property IRIs.
    pub fn with_namespace(rules: Vec<CepRule>, ns: &Namespace) -> Result<Self, CepError> {
        Self::with_resolver(rules, |k| resolve_kind(k, ns))
    }

    fn with_resolver(mut rules: Vec<CepRule>, resolve: impl Fn(&KindRef) -> String) -> Result<Self, CepError> {
        rules.sort_by(|a, b| a.name.cmp(&b.name));
        for pair in rules.windows(2) {
            if pair[0].name == pair[1].name {
                return Err(CepError::Semantic(format!("duplicate rule name `{}`", pair[0].name)));
            }
        }
        for r in &mut rules {
            check_rule(r)?;
            r.pattern = r.pattern.map_kinds(&|k| KindRef::Name(resolve(k)));
        }
        let max_length = rules.iter().map(|r| r.window.length).max().unwrap_or(0);
        Ok(Engine {
            next_end: vec![None; rules.len()],
            rules,
            buffer: Vec::new(),
            next_id: 0,
            last_ts: None,
            sealed: None,
            max_length,
            emit_attributes: BTreeMap::new(),
        })
    }

    /// Attributes stamped on every emitted event (e.g. the region).
    pub fn set_emit_attributes(&mut self, attrs: BTreeMap<String, String>) {
        self.emit_attributes = attrs;
    }

    pub fn rules(&self) -> &[CepRule] {
        &self.rules
    }

    pub fn last_timestamp(&self) -> Option<i64> {
        self.last_ts
    }

    /// Id of the most recently accepted or emitted event.
    pub fn last_event_id(&self) -> Option<EventId> {
        self.next_id.checked_sub(1).map(EventId)
    }

    /// Number of events currently retained for future windows.
    pub fn retained(&self) -> usize {
        self.buffer.len()
    }

    /// Feeds one event. Window ends strictly before its timestamp are
    /// evaluated first. Rejected events leave the engine unchanged.
    pub fn push_event(&mut self, event: Event) -> Result<Vec<Firing>, CepError> {
        let ts = event.timestamp;
        if ts < 0 {
            return Err(CepError::InvalidEvent(format!("negative timestamp {ts}")));
        }
        if let Some(last) = self.last_ts {
            if ts < last {
                return Err(CepError::OutOfOrder { last, got: ts });
            }
        }
        if let Some(sealed) = self.sealed {
            if ts <= sealed {
                return Err(CepError::OutOfOrder { last: sealed, got: ts });
            }
        }
        if self.last_ts.is_none() {
            for (i, r) in self.rules.iter().enumerate() {
                self.next_end[i] = Some(ceil_to(ts, r.window.period()));
            }
        }
        let firings = self.evaluate_until(ts, false);
        let id = self.alloc_id();
        self.buffer.push(StoredEvent { id, event });
        self.last_ts = Some(ts);
        Ok(firings)
    }

    /// Declares that no further events at or before `t` will arrive and
    /// evaluates every window ending at or before `t`.
    pub fn advance_to(&mut self, t: i64) -> Result<Vec<Firing>, CepError> {
        if let Some(last) = self.last_ts {
            if t < last {
                return Err(CepError::OutOfOrder { last, got: t });
            }
        }
        if self.sealed.is_some_and(|s| s >= t) {
            return Ok(Vec::new());
        }
        let firings = if self.last_ts.is_some() { self.evaluate_until(t, true) } else { Vec::new() };
        self.sealed = Some(t);
        Ok(firings)
    }

    fn alloc_id(&mut self) -> EventId {
        let id = EventId(self.next_id);
        self.next_id += 1;
        id
    }

    fn evaluate_until(&mut self, limit: i64, inclusive: bool) -> Vec<Firing> {
        let mut firings = Vec::new();
        while let Some(end) = self.next_end.iter().flatten().copied().min() {
            if end > limit || (!inclusive && end == limit) {
                break;
            }
            let mut emitted = Vec::new();
            for (i, rule) in self.rules.iter().enumerate() {
                if self.next_end[i] != Some(end) {
                    continue;
                }
                self.next_end[i] = Some(end + rule.window.period());
                let start = end - rule.window.length;
                let lo = self.buffer.partition_point(|e| e.event.timestamp <= start);
                let hi = self.buffer.partition_point(|e| e.event.timestamp <= end);
                if let Some(evidence) = evaluate(&rule.pattern, &self.buffer[lo..hi]) {
                    let mut attributes = self.emit_attributes.clone();
                    attributes.insert("rule".into(), rule.name.clone());
                    let event = Event { kind: rule.emit.clone(), timestamp: end, value: Some(rule.severity), attributes };
                    emitted.push((rule.name.clone(), event, evidence));
                }
            }
            for (rule, event, evidence) in emitted {
                let id = self.alloc_id();
                self.buffer.push(StoredEvent { id, event: event.clone() });
                firings.push(Firing { rule, window_end: end, event, event_id: id, evidence });
            }
            self.prune();
        }
        firings
    }

    fn prune(&mut self) {
        let Some(horizon) = self.next_end.iter().flatten().copied().min() else { return };
        let cutoff = horizon - self.max_length;
        let n = self.buffer.partition_point(|e| e.event.timestamp <= cutoff);
        if n > 0 && n * 2 >= self.buffer.len() {
            self.buffer.drain(..n);
        }
    }
}

fn ceil_to(t: i64, period: i64) -> i64 {
    (t + period - 1).div_euclid(period) * period
}

/// Expands a rule kind to the string events are keyed by.
pub fn resolve_kind(kind: &KindRef, ns: &Namespace) -> String {
    match kind {
        KindRef::Iri(i) => i.clone(),
        KindRef::Name(n) if n.contains(':') => ns.expand(n).map(|i| i.to_string()).unwrap_or_else(|_| n.clone()),
        KindRef::Name(n) => n.clone(),
    }
}
