use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Config;
use crate::cep::{CepError, Engine, Event, EventId, Firing};
use crate::forecast::{make_bulletin, BulletinInput, Climatology, ForecastBulletin, ForecastError, ForecastSettings, Period};
use crate::ik::{IkError, IkObservation, IkRegistry};
use crate::ingest::{
    canonicalize, parse_csv_line, parse_json_observation, parse_xml_observation, AlignmentTable, CsvSchema, IngestError, RawObservation,
    SourceFormat,
};
use crate::model::{observation_to_triples, CanonicalObservation, Iri, Namespace};
use crate::store::{InferenceRule, TripleStore};

const JOURNAL: &str = "journal.log";
const STORE: &str = "store.nt";
const FIRINGS: &str = "firings.jsonl";
const IK_LOG: &str = "ik_log.jsonl";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Ik(#[from] IkError),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error("unknown record format `{0}`")]
    UnknownFormat(String),
    #[error("sensor `{0}` is not assigned to a region")]
    UnassignedSensor(String),
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("observation `{0}` was already recorded")]
    DuplicateObservation(String),
    #[error("event at {got} arrived after {last}")]
    OutOfOrder { last: i64, got: i64 },
    #[error("invalid record: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl PipelineError {
    pub fn name(&self) -> &'static str {
        match self {
            PipelineError::Ingest(e) => e.name(),
            PipelineError::Ik(e) => e.name(),
            PipelineError::Forecast(e) => e.name(),
            PipelineError::UnknownFormat(_) => "UnknownFormat",
            PipelineError::UnassignedSensor(_) => "UnassignedSensor",
            PipelineError::UnknownRegion(_) => "UnknownRegion",
            PipelineError::DuplicateObservation(_) => "DuplicateObservation",
            PipelineError::OutOfOrder { .. } => "OutOfOrder",
            PipelineError::Invalid(_) => "Invalid",
            PipelineError::Io(_) => "Io",
        }
    }

    /// Extra key for error bodies, e.g. `("term", "soil_temp")`.
    pub fn detail(&self) -> Option<(&'static str, String)> {
        match self {
            PipelineError::Ingest(e) => e.detail(),
            PipelineError::Ik(IkError::UnknownIndicator(i)) => Some(("indicator", i.clone())),
            PipelineError::UnknownFormat(f) => Some(("format", f.clone())),
            PipelineError::UnassignedSensor(s) => Some(("sensor", s.clone())),
            PipelineError::UnknownRegion(r) => Some(("region", r.clone())),
            PipelineError::DuplicateObservation(o) => Some(("id", o.clone())),
            _ => None,
        }
    }
}

impl From<CepError> for PipelineError {
    fn from(e: CepError) -> Self {
        match e {
            CepError::OutOfOrder { last, got } => PipelineError::OutOfOrder { last, got },
            other => PipelineError::Invalid(other.to_string()),
        }
    }
}

/// A firing together with the region whose engine produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiringRecord {
    pub region: String,
    #[serde(flatten)]
    pub firing: Firing,
}

/// What one accepted record did.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Accepted {
    pub region: String,
    pub event_id: EventId,
    /// Observation IRI, for sensor readings.
    pub observation: Option<Iri>,
    pub firings: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplaySummary {
    pub parsed: usize,
    pub rejected: BTreeMap<String, usize>,
    pub firings: usize,
}

#[derive(Debug, Clone)]
struct RegionState {
    engine: Engine,
    events: BTreeMap<EventId, Event>,
    observations: Vec<CanonicalObservation>,
    firings: Vec<Firing>,
}

/// Shared ingestion path for replayed and posted records, plus the state
/// bulletins are computed from.
#[derive(Debug)]
pub struct Pipeline {
    ns: Namespace,
    table: AlignmentTable,
    csv: CsvSchema,
    inference: Vec<InferenceRule>,
    settings: ForecastSettings,
    baseline: Option<(Period, Period)>,
    min_baseline: usize,
    rule_texts: Vec<String>,
    store: TripleStore,
    regions: BTreeMap<String, RegionState>,
    sensor_region: HashMap<Iri, String>,
    ik: IkRegistry,
    ik_log: Vec<IkObservation>,
    firing_log: Vec<FiringRecord>,
    observation_ids: HashSet<Iri>,
    accepted: usize,
    persistence: Option<PathBuf>,
    journal: Option<BufWriter<File>>,
}

impl Pipeline {
    /// Fresh in-memory pipeline; nothing is read from or written to disk.
    pub fn new(config: &Config) -> Result<Self, PipelineError> {
        let mut store = TripleStore::new();
        store.extend(config.alignment.vocabulary().to_triples());
        store.saturate(&config.inference);
        let mut regions = BTreeMap::new();
        let mut sensor_region = HashMap::new();
        for (id, sensors) in &config.regions {
            let mut engine = Engine::with_namespace(config.rules.clone(), &config.namespace)?;
            engine.set_emit_attributes([("region".to_string(), id.clone())].into());
            regions.insert(id.clone(), RegionState { engine, events: BTreeMap::new(), observations: Vec::new(), firings: Vec::new() });
            for s in sensors {
                sensor_region.insert(config.alignment.sensor_iri(s), id.clone());
            }
        }
        Ok(Pipeline {
            ns: config.namespace.clone(),
            table: config.alignment.clone(),
            csv: CsvSchema::default(),
            inference: config.inference.clone(),
            settings: config.forecast.clone(),
            baseline: config.baseline,
            min_baseline: config.min_baseline,
            rule_texts: config.rules.iter().map(ToString::to_string).collect(),
            store,
            regions,
            sensor_region,
            ik: config.indicators.clone(),
            ik_log: Vec::new(),
            firing_log: Vec::new(),
            observation_ids: HashSet::new(),
            accepted: 0,
            persistence: None,
            journal: None,
        })
    }

    /// Pipeline bound to the configured persistence directory. Records
    /// accepted in earlier runs are re-ingested from its journal first.
    pub fn open(config: &Config) -> Result<Self, PipelineError> {
        let mut p = Pipeline::new(config)?;
        let Some(dir) = &config.persistence_dir else { return Ok(p) };
        fs::create_dir_all(dir)?;
        let journal = dir.join(JOURNAL);
        if journal.exists() {
            let reader = io::BufReader::new(File::open(&journal)?);
            for (n, line) in reader.lines().enumerate() {
                let line = line?;
                if is_skippable(&line) {
                    continue;
                }
                p.ingest_line(&line).map_err(|e| PipelineError::Invalid(format!("journal line {} no longer applies: {e}", n + 1)))?;
            }
        }
        p.journal = Some(BufWriter::new(OpenOptions::new().create(true).append(true).open(&journal)?));
        p.persistence = Some(dir.clone());
        Ok(p)
    }

    pub fn namespace(&self) -> &Namespace {
        &self.ns
    }

    pub fn store(&self) -> &TripleStore {
        &self.store
    }

    pub fn firing_log(&self) -> &[FiringRecord] {
        &self.firing_log
    }

    pub fn ik_log(&self) -> &[IkObservation] {
        &self.ik_log
    }

    pub fn rule_texts(&self) -> &[String] {
        &self.rule_texts
    }

    pub fn regions(&self) -> impl Iterator<Item = &str> {
        self.regions.keys().map(String::as_str)
    }

    /// Accepted input records (observations and IK reports).
    pub fn event_count(&self) -> usize {
        self.accepted
    }

    /// Stored event for an evidence reference.
    pub fn event(&self, region: &str, id: EventId) -> Option<&Event> {
        self.regions.get(region)?.events.get(&id)
    }

    /// Ingests one `format|payload` line (`csv`, `json`, `xml` or `ik`).
    pub fn ingest_line(&mut self, line: &str) -> Result<Accepted, PipelineError> {
        let (tag, payload) = line.split_once('|').ok_or_else(|| IngestError::Malformed("expected `format|payload`".into()))?;
        let tag = tag.trim();
        if tag.eq_ignore_ascii_case("ik") {
            let obs: IkObservation = serde_json::from_str(payload).map_err(|e| IngestError::Malformed(e.to_string()))?;
            return self.ingest_ik_record(obs, line);
        }
        let format = SourceFormat::parse(tag).ok_or_else(|| PipelineError::UnknownFormat(tag.to_string()))?;
        let raw = match format {
            SourceFormat::Csv => parse_csv_line(payload, &self.csv)?,
            SourceFormat::Json => parse_json_observation(payload)?,
            SourceFormat::Xml => parse_xml_observation(payload)?,
        };
        self.ingest_raw_record(&raw, line)
    }

    /// Ingests a JSON observation document, as posted over HTTP.
    pub fn ingest_json(&mut self, body: &str) -> Result<Accepted, PipelineError> {
        let raw = parse_json_observation(body)?;
        let compact = compact_json(body)?;
        self.ingest_raw_record(&raw, &format!("json|{compact}"))
    }

    pub fn ingest_ik(&mut self, obs: IkObservation) -> Result<Accepted, PipelineError> {
        let line = format!("ik|{}", serde_json::to_string(&obs).map_err(|e| PipelineError::Invalid(e.to_string()))?);
        self.ingest_ik_record(obs, &line)
    }

    fn ingest_raw_record(&mut self, raw: &RawObservation, line: &str) -> Result<Accepted, PipelineError> {
        let obs = canonicalize(raw, &self.table)?;
        let region =
            self.sensor_region.get(&obs.sensor_id).cloned().ok_or_else(|| PipelineError::UnassignedSensor(raw.sensor_id_raw.clone()))?;
        if self.observation_ids.contains(&obs.id) {
            return Err(PipelineError::DuplicateObservation(obs.id.to_string()));
        }
        let triples = observation_to_triples(&self.ns, &obs).map_err(|e| PipelineError::Invalid(e.to_string()))?;
        let event = Event::new(obs.property.as_str(), obs.timestamp, Some(obs.value))
            .with_attribute("region", region.clone())
            .with_attribute("sensor", obs.sensor_id.to_string());
        let (event_id, firings) = self.push(&region, event)?;

        let before = self.store.len();
        self.store.extend(triples);
        self.store.saturate_from(&self.inference, before);
        self.observation_ids.insert(obs.id.clone());
        let id = obs.id.clone();
        self.regions.get_mut(&region).expect("known region").observations.push(obs);
        self.journal(line)?;
        Ok(Accepted { region, event_id, observation: Some(id), firings })
    }

    fn ingest_ik_record(&mut self, obs: IkObservation, line: &str) -> Result<Accepted, PipelineError> {
        if !self.regions.contains_key(&obs.region) {
            return Err(PipelineError::UnknownRegion(obs.region.clone()));
        }
        let event = self.ik.to_event(&obs)?;
        let region = obs.region.clone();
        let (event_id, firings) = self.push(&region, event)?;
        self.ik.record(&obs)?;
        self.ik_log.push(obs);
        self.journal(line)?;
        Ok(Accepted { region, event_id, observation: None, firings })
    }

    fn push(&mut self, region: &str, event: Event) -> Result<(EventId, usize), PipelineError> {
        let state = self.regions.get_mut(region).ok_or_else(|| PipelineError::UnknownRegion(region.to_string()))?;
        let firings = state.engine.push_event(event.clone())?;
        let id = state.engine.last_event_id().expect("event was just accepted");
        for f in &firings {
            state.events.insert(f.event_id, f.event.clone());
            log::debug!("{region}: {} fired at {}", f.rule, f.window_end);
        }
        state.events.insert(id, event);
        let n = firings.len();
        state.firings.extend(firings.iter().cloned());
        self.firing_log.extend(firings.into_iter().map(|firing| FiringRecord { region: region.to_string(), firing }));
        self.accepted += 1;
        Ok((id, n))
    }

    fn journal(&mut self, line: &str) -> io::Result<()> {
        if let Some(j) = &mut self.journal {
            writeln!(j, "{line}")?;
        }
        Ok(())
    }

    /// Replays a dataset. Bad lines are counted by error name and never stop
    /// the run. `speed` scales the gaps between record timestamps into real
    /// sleeps (1 = real time); 0 replays as fast as possible.
    pub fn replay(&mut self, input: impl BufRead, speed: f64) -> Result<ReplaySummary, PipelineError> {
        let mut summary = ReplaySummary::default();
        let mut previous: Option<i64> = None;
        for line in input.lines() {
            let line = line?;
            if is_skippable(&line) {
                continue;
            }
            match self.ingest_line(&line) {
                Ok(acc) => {
                    summary.parsed += 1;
                    summary.firings += acc.firings;
                    let ts = self.regions[&acc.region].engine.last_timestamp();
                    if speed > 0.0 {
                        if let (Some(a), Some(b)) = (previous, ts) {
                            if b > a {
                                thread::sleep(Duration::from_secs_f64((b - a) as f64 / speed));
                            }
                        }
                    }
                    previous = ts.or(previous);
                }
                Err(PipelineError::Io(e)) => return Err(PipelineError::Io(e)),
                Err(e) => {
                    log::debug!("rejected: {e}");
                    *summary.rejected.entry(e.name().to_string()).or_default() += 1;
                }
            }
        }
        self.persist()?;
        Ok(summary)
    }

    /// Climatology of one region's observations inside the baseline range.
    pub fn climatology(&self, region: &str) -> Result<Climatology, PipelineError> {
        let state = self.regions.get(region).ok_or_else(|| PipelineError::UnknownRegion(region.to_string()))?;
        let in_baseline = |o: &&CanonicalObservation| match self.baseline {
            Some((start, end)) => o.timestamp >= start.start() && o.timestamp < end.end(),
            None => true,
        };
        Ok(Climatology::build(state.observations.iter().filter(in_baseline), self.min_baseline))
    }

    /// Bulletin for `region` and `period`. Windows ending inside the period
    /// that the stream has not passed yet are evaluated on a scratch copy
    /// of the engine, so asking never changes what can still be ingested.
    pub fn forecast(&self, region: &str, period: Period) -> Result<ForecastBulletin, PipelineError> {
        let state = self.regions.get(region).ok_or_else(|| PipelineError::UnknownRegion(region.to_string()))?;
        let mut firings = state.firings.clone();
        let horizon = period.end() - 1;
        if state.engine.last_timestamp().is_some_and(|t| t <= horizon) {
            let mut scratch = state.engine.clone();
            firings.extend(scratch.advance_to(horizon)?);
        }
        let climatology = self.climatology(region)?;
        let end = period.end();
        let ik = self.ik.signal(region, end - self.settings.ik_window, end);
        let input = BulletinInput { region, period, observations: &state.observations, climatology: &climatology, firings: &firings, ik };
        Ok(make_bulletin(&input, &self.settings, &self.ns)?)
    }

    /// Makes every accepted record durable without rewriting snapshots.
    pub fn sync_journal(&mut self) -> io::Result<()> {
        match &mut self.journal {
            Some(j) => j.flush(),
            None => Ok(()),
        }
    }

    /// Writes store, firing log and IK log snapshots and flushes the journal.
    pub fn persist(&mut self) -> Result<(), PipelineError> {
        if let Some(j) = &mut self.journal {
            j.flush()?;
        }
        let Some(dir) = self.persistence.clone() else { return Ok(()) };
        write_atomic(&dir.join(STORE), self.store.serialize().as_bytes())?;
        write_atomic(&dir.join(FIRINGS), jsonl(&self.firing_log)?.as_bytes())?;
        write_atomic(&dir.join(IK_LOG), jsonl(&self.ik_log)?.as_bytes())?;
        Ok(())
    }
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

fn compact_json(body: &str) -> Result<String, PipelineError> {
    let v: serde_json::Value = serde_json::from_str(body).map_err(|e| IngestError::Malformed(e.to_string()))?;
    Ok(v.to_string())
}

fn jsonl<T: Serialize>(items: &[T]) -> Result<String, PipelineError> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).map_err(|e| PipelineError::Invalid(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

/// Writes via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}
