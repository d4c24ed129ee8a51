use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::cep::{parse_duration, parse_ruleset, CepRule};
use crate::forecast::{DviWeights, ForecastSettings, Period, Thresholds, DEFAULT_MIN_BASELINE};
use crate::ik::{compile_indicator_rules, IkRegistry};
use crate::ingest::AlignmentTable;
use crate::model::{Namespace, Vocabulary, DEFAULT_BASE_IRI};
use crate::store::{builtin_rules, InferenceRule};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("file not found: {0}")]
    NotFound(PathBuf),
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
}

fn invalid(field: &str, reason: impl ToString) -> ConfigError {
    ConfigError::InvalidConfig { field: field.to_string(), reason: reason.to_string() }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default = "default_base")]
    base_iri: String,
    alignment: PathBuf,
    indicators: PathBuf,
    rules: PathBuf,
    inference_rules: Option<PathBuf>,
    #[serde(default)]
    weights: DviWeights,
    #[serde(default)]
    thresholds: Thresholds,
    regions: BTreeMap<String, Vec<String>>,
    #[serde(default = "default_bind")]
    bind: String,
    persistence_dir: Option<PathBuf>,
    baseline: Option<BaselineFile>,
    #[serde(default)]
    ik: IkFile,
    #[serde(default = "default_min_baseline")]
    min_baseline: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BaselineFile {
    start: Period,
    end: Period,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct IkFile {
    k: u32,
    window: String,
    compile_rules: bool,
}

impl Default for IkFile {
    fn default() -> Self {
        IkFile { k: 3, window: "90d".into(), compile_rules: true }
    }
}

fn default_base() -> String {
    DEFAULT_BASE_IRI.to_string()
}

fn default_bind() -> String {
    "127.0.0.1:8080".to_string()
}

fn default_min_baseline() -> usize {
    DEFAULT_MIN_BASELINE
}

/// A validated configuration with every referenced file loaded.
#[derive(Debug, Clone)]
pub struct Config {
    pub path: PathBuf,
    pub namespace: Namespace,
    pub alignment: AlignmentTable,
    pub indicators: IkRegistry,
    /// User rules followed by the compiled indicator rules.
    pub rules: Vec<CepRule>,
    pub inference: Vec<InferenceRule>,
    pub forecast: ForecastSettings,
    /// Region id to raw sensor ids.
    pub regions: BTreeMap<String, Vec<String>>,
    pub bind: String,
    pub persistence_dir: Option<PathBuf>,
    /// Inclusive range of months feeding the climatology; all data if unset.
    pub baseline: Option<(Period, Period)>,
    pub min_baseline: usize,
}

fn read(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|_| ConfigError::NotFound(path.to_path_buf()))
}

/// Loads the TOML config. Relative paths resolve against its directory.
pub fn load_config(path: impl AsRef<Path>) -> Result<Config, ConfigError> {
    let path = path.as_ref();
    let text = read(path)?;
    let file: ConfigFile = toml::from_str(&text).map_err(|e| invalid("config", e.message()))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { dir.join(p) };

    let namespace = Namespace::new(file.base_iri).map_err(|e| invalid("base_iri", e))?;
    file.weights.validate().map_err(|e| invalid("weights", e))?;
    file.thresholds.validate().map_err(|e| invalid("thresholds", e))?;
    if file.min_baseline < 2 {
        return Err(invalid("min_baseline", "must be at least 2"));
    }

    let vocab = Vocabulary::standard(namespace.clone());
    let alignment = AlignmentTable::from_json(&read(&resolve(&file.alignment))?, vocab.clone()).map_err(|e| invalid("alignment", e))?;
    let indicators = IkRegistry::from_json(&read(&resolve(&file.indicators))?).map_err(|e| invalid("indicators", e))?;

    let mut rules = parse_ruleset(&read(&resolve(&file.rules))?).map_err(|e| invalid("rules", e))?;
    let window = parse_duration(&file.ik.window).map_err(|e| invalid("ik.window", e))?;
    if file.ik.compile_rules {
        rules.extend(compile_indicator_rules(file.ik.k, window).map_err(|e| invalid("ik.k", e))?);
    }
    let mut names = HashSet::new();
    for r in &rules {
        if !names.insert(r.name.as_str()) {
            return Err(invalid("rules", format!("duplicate rule name `{}`", r.name)));
        }
        if vocab.is_property(&namespace.ex(&r.emit)) {
            return Err(invalid("rules", format!("rule `{}` emits the property name `{}`", r.name, r.emit)));
        }
    }

    let mut inference = builtin_rules(&namespace);
    if let Some(p) = &file.inference_rules {
        for (n, line) in read(&resolve(p))?.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let rule = InferenceRule::parse(line, &namespace).map_err(|e| invalid("inference_rules", format!("line {}: {e}", n + 1)))?;
            inference.push(rule);
        }
    }

    if file.regions.is_empty() {
        return Err(invalid("regions", "at least one region is required"));
    }
    let mut seen = HashSet::new();
    for (region, sensors) in &file.regions {
        if sensors.is_empty() {
            return Err(invalid("regions", format!("region `{region}` has no sensors")));
        }
        for s in sensors {
            if !seen.insert(alignment.sensor_iri(s)) {
                return Err(invalid("regions", format!("sensor `{s}` is assigned twice")));
            }
        }
    }
    for ind in indicators.indicators() {
        if !file.regions.contains_key(&ind.region) {
            return Err(invalid("indicators", format!("indicator `{}` names unknown region `{}`", ind.id, ind.region)));
        }
    }

    let baseline = match file.baseline {
        Some(b) if b.start > b.end => return Err(invalid("baseline", "start is after end")),
        Some(b) => Some((b.start, b.end)),
        None => None,
    };
    if file.bind.parse::<std::net::SocketAddr>().is_err() {
        return Err(invalid("bind", format!("`{}` is not a socket address", file.bind)));
    }

    Ok(Config {
        path: path.to_path_buf(),
        namespace,
        alignment,
        indicators,
        rules,
        inference,
        forecast: ForecastSettings { weights: file.weights, thresholds: file.thresholds, ik_window: window },
        regions: file.regions,
        bind: file.bind,
        persistence_dir: file.persistence_dir.map(|p| resolve(&p)),
        baseline,
        min_baseline: file.min_baseline,
    })
}
