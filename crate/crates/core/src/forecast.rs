//! Monthly climatology, anomalies, the drought vulnerability index and
//! bulletin assembly.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cep::Firing;
use crate::ik::{IkSignal, DRIER_SIGNAL, WETTER_SIGNAL};
use crate::model::time::{self, month_start};
use crate::model::{CanonicalObservation, Iri, Namespace};

pub const DEFAULT_MIN_BASELINE: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForecastError {
    #[error("insufficient baseline for {property} in month {month}")]
    InsufficientBaseline { property: String, month: u32 },
    #[error("no {property} observations for {region} in {period}")]
    NoData { region: String, period: String, property: String },
    #[error("invalid weights: {0}")]
    BadWeights(String),
    #[error("invalid thresholds: {0}")]
    BadThresholds(String),
    #[error("invalid period `{0}`, expected YYYY-MM")]
    BadPeriod(String),
}

impl ForecastError {
    pub fn name(&self) -> &'static str {
        match self {
            ForecastError::InsufficientBaseline { .. } => "InsufficientBaseline",
            ForecastError::NoData { .. } => "NoData",
            ForecastError::BadWeights(_) => "BadWeights",
            ForecastError::BadThresholds(_) => "BadThresholds",
            ForecastError::BadPeriod(_) => "BadPeriod",
        }
    }
}

/// A calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Period {
    pub year: i32,
    pub month: u32,
}

impl Period {
    pub fn new(year: i32, month: u32) -> Result<Self, ForecastError> {
        let p = Period { year, month };
        match month_start(year, month) {
            Some(t) if t >= 0 => Ok(p),
            _ => Err(ForecastError::BadPeriod(format!("{year:04}-{month:02}"))),
        }
    }

    pub fn containing(ts: i64) -> Self {
        let (year, month) = time::year_month(ts);
        Period { year, month }
    }

    pub fn start(&self) -> i64 {
        month_start(self.year, self.month).expect("validated period")
    }

    pub fn next(&self) -> Period {
        if self.month == 12 {
            Period { year: self.year + 1, month: 1 }
        } else {
            Period { year: self.year, month: self.month + 1 }
        }
    }

    /// Exclusive end: the first second of the following month.
    pub fn end(&self) -> i64 {
        self.next().start()
    }

    pub fn contains(&self, ts: i64) -> bool {
        ts >= self.start() && ts < self.end()
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Period {
    type Err = ForecastError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ForecastError::BadPeriod(s.to_string());
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        Period::new(y.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?).map_err(|_| bad())
    }
}

impl Serialize for Period {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Period {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClimatologyEntry {
    pub mean: f64,
    /// Sample standard deviation (n - 1); 0 when n < 2.
    pub std_dev: f64,
    pub n: usize,
    pub sorted: Vec<f64>,
    pub usable: bool,
}

/// Per (property, calendar month) statistics of raw readings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Climatology {
    entries: BTreeMap<(Iri, u32), ClimatologyEntry>,
}

impl Climatology {
    pub fn build<'a>(history: impl IntoIterator<Item = &'a CanonicalObservation>, min_count: usize) -> Self {
        let mut groups: BTreeMap<(Iri, u32), Vec<f64>> = BTreeMap::new();
        for o in history {
            let (_, month) = time::year_month(o.timestamp);
            groups.entry((o.property.clone(), month)).or_default().push(o.value);
        }
        let entries = groups
            .into_iter()
            .map(|(k, mut xs)| {
                let n = xs.len();
                let mean = xs.iter().sum::<f64>() / n as f64;
                let std_dev = if n > 1 { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
                xs.sort_by(f64::total_cmp);
                let usable = n >= min_count && std_dev > 0.0;
                (k, ClimatologyEntry { mean, std_dev, n, sorted: xs, usable })
            })
            .collect();
        Climatology { entries }
    }

    pub fn get(&self, property: &Iri, month: u32) -> Option<&ClimatologyEntry> {
        self.entries.get(&(property.clone(), month))
    }

    /// The entry, if it may be used for standardization.
    pub fn usable(&self, property: &Iri, month: u32) -> Result<&ClimatologyEntry, ForecastError> {
        self.get(property, month)
            .filter(|e| e.usable)
            .ok_or_else(|| ForecastError::InsufficientBaseline { property: property.to_string(), month })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn standardized_anomaly(x: f64, mean: f64, std_dev: f64) -> Result<f64, ForecastError> {
    if std_dev.is_nan() || std_dev <= 0.0 {
        return Err(ForecastError::InsufficientBaseline { property: String::new(), month: 0 });
    }
    Ok((x - mean) / std_dev)
}

/// Weibull plotting position `r / (n + 1)`, r = samples <= x.
pub fn empirical_percentile(x: f64, sorted: &[f64]) -> Result<f64, ForecastError> {
    if sorted.is_empty() {
        return Err(ForecastError::InsufficientBaseline { property: String::new(), month: 0 });
    }
    let r = sorted.partition_point(|&s| s <= x);
    Ok(r as f64 / (sorted.len() + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DviWeights {
    pub precip: f64,
    pub soil: f64,
    pub temp: f64,
    pub ik: f64,
}

impl Default for DviWeights {
    fn default() -> Self {
        DviWeights { precip: 0.4, soil: 0.3, temp: 0.1, ik: 0.2 }
    }
}

impl DviWeights {
    pub fn validate(&self) -> Result<(), ForecastError> {
        let ws = [self.precip, self.soil, self.temp, self.ik];
        if ws.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(ForecastError::BadWeights("weights must be finite and non-negative".into()));
        }
        let sum: f64 = ws.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ForecastError::BadWeights(format!("weights sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

fn unit_clamp(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Per-term contributions `[precip, soil, temp, ik]`, already weighted.
pub fn dvi_components(z_precip: f64, sm_percentile: f64, z_temp: f64, ik: f64, w: &DviWeights) -> [f64; 4] {
    let q = |u: f64| unit_clamp(u / 2.0);
    [w.precip * q(-z_precip), w.soil * (1.0 - sm_percentile), w.temp * q(z_temp), w.ik * (ik + 1.0) / 2.0]
}

pub fn compute_dvi(z_precip: f64, sm_percentile: f64, z_temp: f64, ik: f64, w: &DviWeights) -> Result<f64, ForecastError> {
    w.validate()?;
    Ok(unit_clamp(dvi_components(z_precip, sm_percentile, z_temp, ik, w).iter().sum()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    None,
    Watch,
    Warning,
    Severe,
}

/// Lower bounds of Watch, Warning and Severe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub watch: f64,
    pub warning: f64,
    pub severe: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { watch: 0.25, warning: 0.5, severe: 0.75 }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), ForecastError> {
        if 0.0 < self.watch && self.watch < self.warning && self.warning < self.severe && self.severe <= 1.0 {
            Ok(())
        } else {
            Err(ForecastError::BadThresholds("expected 0 < watch < warning < severe <= 1".into()))
        }
    }
}

pub fn classify_severity(dvi: f64, t: &Thresholds) -> Severity {
    if dvi >= t.severe {
        Severity::Severe
    } else if dvi >= t.warning {
        Severity::Warning
    } else if dvi >= t.watch {
        Severity::Watch
    } else {
        Severity::None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroughtIndexReport {
    pub region: String,
    pub period: Period,
    pub z_precip: f64,
    pub sm_percentile: f64,
    pub z_temp: f64,
    pub ik: IkSignal,
    pub dvi: f64,
    pub severity: Severity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    Firing {
        rule: String,
        #[serde(with = "time::utc_text")]
        at: i64,
        event_id: u64,
        severity: f64,
    },
    Ik {
        value: f64,
        support: usize,
    },
    /// A non-zero weighted DVI term.
    Index {
        component: String,
        contribution: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastBulletin {
    #[serde(flatten)]
    pub report: DroughtIndexReport,
    #[serde(with = "time::utc_text")]
    pub issued_at: i64,
    /// Monthly precipitation total across the region's gauges, mm.
    pub precip_total: f64,
    pub evidence: Vec<Evidence>,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSettings {
    pub weights: DviWeights,
    pub thresholds: Thresholds,
    /// Trailing IK window ending at the period end, seconds.
    pub ik_window: i64,
}

impl Default for ForecastSettings {
    fn default() -> Self {
        ForecastSettings { weights: DviWeights::default(), thresholds: Thresholds::default(), ik_window: 90 * time::DAY }
    }
}

/// Everything a bulletin is computed from.
pub struct BulletinInput<'a> {
    pub region: &'a str,
    pub period: Period,
    /// The region's observations; only those inside the period are used.
    pub observations: &'a [CanonicalObservation],
    pub climatology: &'a Climatology,
    /// The region's firings; those ending inside the period become evidence.
    pub firings: &'a [Firing],
    /// IK signal over the trailing window ending at the period end.
    pub ik: IkSignal,
}

/// Builds a bulletin. The period's mean daily precipitation, soil moisture
/// and temperature are compared against the calendar month's baseline of
/// daily readings. A zero IK weight removes IK from the bulletin entirely.
pub fn make_bulletin(input: &BulletinInput<'_>, settings: &ForecastSettings, ns: &Namespace) -> Result<ForecastBulletin, ForecastError> {
    settings.weights.validate()?;
    settings.thresholds.validate()?;
    let period = input.period;
    let in_period: Vec<&CanonicalObservation> = input.observations.iter().filter(|o| period.contains(o.timestamp)).collect();
    let values = |name: &str| -> Result<(Iri, Vec<f64>), ForecastError> {
        let prop = ns.ex(name);
        let xs: Vec<f64> = in_period.iter().filter(|o| o.property == prop).map(|o| o.value).collect();
        if xs.is_empty() {
            return Err(ForecastError::NoData { region: input.region.to_string(), period: period.to_string(), property: prop.to_string() });
        }
        Ok((prop, xs))
    };
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;

    let (p_prop, precip) = values("precipitation")?;
    let (s_prop, soil) = values("soilMoisture")?;
    let (t_prop, temp) = values("airTemperature")?;
    let clim = input.climatology;
    let pe = clim.usable(&p_prop, period.month)?;
    let se = clim.usable(&s_prop, period.month)?;
    let te = clim.usable(&t_prop, period.month)?;

    let z_precip = standardized_anomaly(mean(&precip), pe.mean, pe.std_dev)?;
    let sm_percentile = empirical_percentile(mean(&soil), &se.sorted)?;
    let z_temp = standardized_anomaly(mean(&temp), te.mean, te.std_dev)?;

    let ablated = settings.weights.ik == 0.0;
    let ik = if ablated { IkSignal::default() } else { input.ik };
    let parts = dvi_components(z_precip, sm_percentile, z_temp, ik.value, &settings.weights);
    let dvi = compute_dvi(z_precip, sm_percentile, z_temp, ik.value, &settings.weights)?;
    let severity = classify_severity(dvi, &settings.thresholds);

    let mut firings: Vec<&Firing> = input
        .firings
        .iter()
        .filter(|f| period.contains(f.window_end))
        .filter(|f| !(ablated && (f.event.kind == DRIER_SIGNAL || f.event.kind == WETTER_SIGNAL)))
        .collect();
    firings.sort_by(|a, b| (a.window_end, &a.rule).cmp(&(b.window_end, &b.rule)));
    let mut evidence: Vec<Evidence> = firings
        .iter()
        .map(|f| Evidence::Firing {
            rule: f.rule.clone(),
            at: f.window_end,
            event_id: f.event_id.0,
            severity: f.event.value.unwrap_or(0.0),
        })
        .collect();
    if ik.support > 0 {
        evidence.push(Evidence::Ik { value: ik.value, support: ik.support });
    }
    for (name, c) in ["precipitation", "soil_moisture", "temperature", "ik"].iter().zip(parts) {
        if c > 0.0 && !(ablated && *name == "ik") {
            evidence.push(Evidence::Index { component: name.to_string(), contribution: c });
        }
    }

    let summary = format!(
        "{} {}: {:?} (DVI {:.2}; precipitation z {:+.2}, soil moisture p{:.0}, temperature z {:+.2}, IK {:+.2} from {} reports)",
        input.region,
        period,
        severity,
        dvi,
        z_precip,
        sm_percentile * 100.0,
        z_temp,
        ik.value,
        ik.support
    );
    Ok(ForecastBulletin {
        report: DroughtIndexReport { region: input.region.to_string(), period, z_precip, sm_percentile, z_temp, ik, dvi, severity },
        issued_at: period.end(),
        precip_total: precip.iter().sum(),
        evidence,
        summary,
    })
}
