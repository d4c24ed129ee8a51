//! Indigenous-knowledge indicators: registry, observation log, the signed
//! dryness signal and the CEP rules derived from it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cep::{format_duration, parse_rule, CepRule, Event};
use crate::model::time::{self, utc_text};

pub const DRIER_OBSERVATION: &str = "IkDrierObservation";
pub const WETTER_OBSERVATION: &str = "IkWetterObservation";
pub const DRIER_SIGNAL: &str = "IkDrierSignal";
pub const WETTER_SIGNAL: &str = "IkWetterSignal";
/// Severity attached to compiled indicator rules.
pub const RULE_SEVERITY: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IkError {
    #[error("indicator `{0}` is already registered")]
    DuplicateId(String),
    #[error("weight {weight} of `{id}` is outside (0, 1]")]
    InvalidWeight { id: String, weight: f64 },
    #[error("indicator `{0}` has an empty or invalid season")]
    EmptySeason(String),
    #[error("unknown indicator `{0}`")]
    UnknownIndicator(String),
    #[error("`{indicator}` is not in season in month {month}")]
    OutOfSeason { indicator: String, month: u32 },
    #[error("confidence {0} is outside [0, 1]")]
    BadConfidence(f64),
    #[error("rule count threshold must be at least 1")]
    BadThreshold,
    #[error("invalid indicator file: {0}")]
    Parse(String),
}

impl IkError {
    pub fn name(&self) -> &'static str {
        match self {
            IkError::DuplicateId(_) => "DuplicateId",
            IkError::InvalidWeight { .. } => "InvalidWeight",
            IkError::EmptySeason(_) => "EmptySeason",
            IkError::UnknownIndicator(_) => "UnknownIndicator",
            IkError::OutOfSeason { .. } => "OutOfSeason",
            IkError::BadConfidence(_) => "BadConfidence",
            IkError::BadThreshold => "BadThreshold",
            IkError::Parse(_) => "Parse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndicatorKind {
    Presence,
    Absence,
    Behavior,
    Flowering,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Valence {
    Drier,
    Wetter,
}

impl Valence {
    pub fn sign(self) -> f64 {
        match self {
            Valence::Drier => 1.0,
            Valence::Wetter => -1.0,
        }
    }

    pub fn observation_kind(self) -> &'static str {
        match self {
            Valence::Drier => DRIER_OBSERVATION,
            Valence::Wetter => WETTER_OBSERVATION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IkIndicator {
    pub id: String,
    pub phenomenon: String,
    pub kind: IndicatorKind,
    pub valence: Valence,
    pub weight: f64,
    /// Calendar months, 1 to 12.
    pub season: BTreeSet<u32>,
    pub region: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IkObservation {
    #[serde(alias = "indicatorId")]
    pub indicator_id: String,
    #[serde(with = "utc_text")]
    pub timestamp: i64,
    pub region: String,
    pub confidence: f64,
}

/// Signed dryness in `[-1, 1]`; +1 is strongly drier.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IkSignal {
    pub value: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Recorded {
    timestamp: i64,
    region: String,
    signed: f64,
    magnitude: f64,
}

/// Indicator registry plus the append-only observation log.
#[derive(Debug, Clone, Default)]
pub struct IkRegistry {
    indicators: BTreeMap<String, IkIndicator>,
    log: Vec<Recorded>,
}

impl IkRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reads an indicator file holding one indicator object or an array.
    pub fn from_json(text: &str) -> Result<Self, IkError> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum OneOrMany {
            Many(Vec<IkIndicator>),
            One(IkIndicator),
        }
        let parsed: OneOrMany = serde_json::from_str(text).map_err(|e| IkError::Parse(e.to_string()))?;
        let list = match parsed {
            OneOrMany::Many(v) => v,
            OneOrMany::One(i) => vec![i],
        };
        let mut reg = IkRegistry::new();
        for ind in list {
            reg.register(ind)?;
        }
        Ok(reg)
    }

    pub fn register(&mut self, ind: IkIndicator) -> Result<(), IkError> {
        if !(ind.weight > 0.0 && ind.weight <= 1.0) {
            return Err(IkError::InvalidWeight { id: ind.id, weight: ind.weight });
        }
        if ind.season.is_empty() || ind.season.iter().any(|m| !(1..=12).contains(m)) {
            return Err(IkError::EmptySeason(ind.id));
        }
        if self.indicators.contains_key(&ind.id) {
            return Err(IkError::DuplicateId(ind.id));
        }
        self.indicators.insert(ind.id.clone(), ind);
        Ok(())
    }

    pub fn indicator(&self, id: &str) -> Option<&IkIndicator> {
        self.indicators.get(id)
    }

    pub fn indicators(&self) -> impl Iterator<Item = &IkIndicator> {
        self.indicators.values()
    }

    pub fn observation_count(&self) -> usize {
        self.log.len()
    }

    /// Checks `obs` without recording it and returns the event it maps to.
    pub fn to_event(&self, obs: &IkObservation) -> Result<Event, IkError> {
        let ind = self.indicators.get(&obs.indicator_id).ok_or_else(|| IkError::UnknownIndicator(obs.indicator_id.clone()))?;
        if !(0.0..=1.0).contains(&obs.confidence) {
            return Err(IkError::BadConfidence(obs.confidence));
        }
        let (_, month) = time::year_month(obs.timestamp);
        if !ind.season.contains(&month) {
            return Err(IkError::OutOfSeason { indicator: ind.id.clone(), month });
        }
        Ok(Event::new(ind.valence.observation_kind(), obs.timestamp, Some(ind.weight * obs.confidence))
            .with_attribute("region", obs.region.clone())
            .with_attribute("indicator", ind.id.clone()))
    }

    /// Validates and logs `obs`; the returned event is meant for the
    /// region's CEP engine.
    pub fn record(&mut self, obs: &IkObservation) -> Result<Event, IkError> {
        let event = self.to_event(obs)?;
        let sign = self.indicators[&obs.indicator_id].valence.sign();
        let magnitude = event.value.unwrap_or(0.0);
        self.log.push(Recorded { timestamp: obs.timestamp, region: obs.region.clone(), signed: sign * magnitude, magnitude });
        Ok(event)
    }

    /// Weighted mean valence of the region's observations in `(start, end]`.
    pub fn signal(&self, region: &str, start: i64, end: i64) -> IkSignal {
        let (mut num, mut den, mut support) = (0.0, 0.0, 0);
        for r in self.log.iter().filter(|r| r.region == region && r.timestamp > start && r.timestamp <= end) {
            num += r.signed;
            den += r.magnitude;
            support += 1;
        }
        let value = if den > 0.0 { (num / den).clamp(-1.0, 1.0) } else { 0.0 };
        IkSignal { value, support }
    }
}

/// The two counting rules over IK observation events:
/// `COUNT(IkDrierObservation) >= k WITHIN window EMIT IkDrierSignal` and
/// its wetter counterpart.
pub fn compile_indicator_rules(k: u32, window: i64) -> Result<Vec<CepRule>, IkError> {
    if k == 0 {
        return Err(IkError::BadThreshold);
    }
    [("ik_drier", DRIER_OBSERVATION, DRIER_SIGNAL), ("ik_wetter", WETTER_OBSERVATION, WETTER_SIGNAL)]
        .into_iter()
        .map(|(name, kind, emit)| {
            let text =
                format!("RULE {name} WHEN COUNT({kind}) >= {k} WITHIN {} EMIT {emit} SEVERITY {RULE_SEVERITY}", format_duration(window));
            parse_rule(&text).map_err(|e| IkError::Parse(e.to_string()))
        })
        .collect()
}
