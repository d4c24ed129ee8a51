//! Deterministic synthetic drought scenario: three sensors in one region,
//! daily readings in mixed formats, an engineered drought and matching
//! community reports.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::forecast::Period;
use crate::model::canonical_double;
use crate::model::time::{format_utc, DAY};

pub const ALIGNMENT_JSON: &str = include_str!("../examples/data/alignment.json");
pub const INDICATORS_JSON: &str = include_str!("../examples/data/indicators.json");
pub const RULES_CEP: &str = include_str!("../examples/data/rules.cep");
pub const CONFIG_TOML: &str = include_str!("../examples/data/config.toml");

pub const REGION: &str = "free_state";
const F_SCALE: f64 = 0.5555555555555556;
const F_OFFSET: f64 = -17.77777777777778;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub start: Period,
    pub months: u32,
    /// Months 1..=baseline_months feed the climatology.
    pub baseline_months: u32,
    /// Inclusive 1-based month range with engineered drought.
    pub drought: (u32, u32),
    pub ik_reports_per_month: u32,
    pub include_bad_lines: bool,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            seed: 2024,
            start: Period { year: 2020, month: 1 },
            months: 36,
            baseline_months: 24,
            drought: (28, 33),
            ik_reports_per_month: 3,
            include_bad_lines: true,
        }
    }
}

/// Expected replay outcome, written next to the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub region: String,
    pub parsed: usize,
    pub rejected: BTreeMap<String, usize>,
    pub baseline: (Period, Period),
    pub drought_periods: Vec<Period>,
    pub periods: Vec<Period>,
}

pub struct Scenario {
    pub lines: Vec<String>,
    pub manifest: Manifest,
}

impl Scenario {
    pub fn dataset(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

/// Mean daily level and spread of each property, by calendar month.
fn climate(month: u32) -> [(f64, f64); 3] {
    let phase = (f64::from(month) - 1.0) / 12.0 * std::f64::consts::TAU;
    [
        (3.0 + 1.5 * phase.cos(), 0.5),  // precipitation, mm/day; wet in January
        (25.0 + 8.0 * phase.cos(), 3.0), // soil moisture, % volumetric
        (18.0 + 8.0 * phase.cos(), 2.5), // air temperature, degC
    ]
}

fn ts(t: i64) -> String {
    format_utc(t).expect("scenario timestamps are valid")
}

fn csv_rain(t: i64, mm: f64) -> String {
    format!("csv|gauge-01,rain,{},mm,{},-29.12,26.21", canonical_double(mm), ts(t))
}

fn json_soil(t: i64, pct: f64) -> String {
    format!(
        r#"json|{{"sensor_id": "probe-02", "property": "soil_hum", "value": {}, "unit": "%", "timestamp": "{}"}}"#,
        canonical_double(pct),
        ts(t)
    )
}

fn fahrenheit(c: f64) -> f64 {
    (c - F_OFFSET) / F_SCALE
}

fn xml_temp(t: i64, c: f64) -> String {
    format!(
        r#"xml|<Observation><procedure>thermo-03</procedure><observedProperty>air_temp</observedProperty><result uom="degF">{}</result><time>{}</time></Observation>"#,
        canonical_double(fahrenheit(c)),
        ts(t)
    )
}

/// The Celsius value the pipeline will recover from `xml_temp(_, c)`.
fn temp_round_trip(c: f64) -> f64 {
    let f: f64 = canonical_double(fahrenheit(c)).parse().expect("canonical doubles parse");
    f * F_SCALE + F_OFFSET
}

fn ik_line(t: i64, indicator: &str, confidence: f64) -> String {
    format!(
        r#"ik|{{"indicator_id": "{indicator}", "timestamp": "{}", "region": "{REGION}", "confidence": {}}}"#,
        ts(t),
        canonical_double(confidence)
    )
}

struct Lines {
    // (sort key, insertion order, line)
    items: Vec<(i64, usize, String)>,
    parsed: usize,
    rejected: BTreeMap<String, usize>,
}

impl Lines {
    fn good(&mut self, key: i64, line: String) {
        self.parsed += 1;
        let n = self.items.len();
        self.items.push((key, n, line));
    }

    fn bad(&mut self, key: i64, reason: &str, line: String) {
        *self.rejected.entry(reason.to_string()).or_default() += 1;
        let n = self.items.len();
        self.items.push((key, n, line));
    }
}

pub fn generate(spec: &ScenarioSpec) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut lines = Lines { items: Vec::new(), parsed: 0, rejected: BTreeMap::new() };
    let mut periods = Vec::new();
    let mut p = spec.start;
    for _ in 0..spec.months {
        periods.push(p);
        p = p.next();
    }
    // Baseline samples per calendar month, as the pipeline will see them.
    let mut samples: BTreeMap<u32, [Vec<f64>; 3]> = BTreeMap::new();
    let (d0, d1) = spec.drought;

    for (i, period) in periods.iter().enumerate() {
        let index = i as u32 + 1;
        let start = period.start();
        let days = (period.end() - start) / DAY;
        let params = climate(period.month);
        let engineered = (d0..=d1).contains(&index);
        let target = engineered.then(|| {
            let s = samples.get(&period.month).expect("baseline precedes the drought");
            let stats = |xs: &[f64]| {
                let n = xs.len() as f64;
                let m = xs.iter().sum::<f64>() / n;
                (m, (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
            };
            let (pm, ps) = stats(&s[0]);
            let soil_min = s[1].iter().copied().fold(f64::INFINITY, f64::min);
            let (tm, tsd) = stats(&s[2]);
            ((pm - 2.0 * ps).max(0.0), soil_min - 2.0, tm + tsd)
        });

        for d in 0..days {
            let t = start + d * DAY + 6 * 3600;
            let (rain, soil, temp) = match target {
                Some(v) => v,
                None => {
                    let draw = |(m, s): (f64, f64), rng: &mut ChaCha8Rng| Normal::new(m, s).expect("positive spread").sample(rng);
                    let rain = draw(params[0], &mut rng).max(0.0);
                    let soil = draw(params[1], &mut rng).clamp(0.0, 100.0);
                    let temp = draw(params[2], &mut rng);
                    (rain, soil, temp)
                }
            };
            // Round to what a logger would report.
            let (rain, soil, temp) = ((rain * 100.0).round() / 100.0, (soil * 100.0).round() / 100.0, (temp * 100.0).round() / 100.0);
            lines.good(t, csv_rain(t, rain));
            lines.good(t, json_soil(t, soil));
            lines.good(t, xml_temp(t, temp));
            if index <= spec.baseline_months {
                let s = samples.entry(period.month).or_default();
                s[0].push(rain);
                s[1].push(soil);
                s[2].push(temp_round_trip(temp));
            }
        }

        if engineered {
            for k in 0..spec.ik_reports_per_month {
                let day = 4 + i64::from(k) * 10;
                let indicator = if k % 2 == 0 { "lehota_frogs_silent" } else { "sifennefene_worms_scarce" };
                lines.good(start + day * DAY + 12 * 3600, ik_line(start + day * DAY + 12 * 3600, indicator, 1.0));
            }
        } else if index <= spec.baseline_months && matches!(period.month, 10 | 11) {
            let t = start + 9 * DAY + 12 * 3600;
            lines.good(t, ik_line(t, "peulwane_birds_calling", 0.8));
        }
    }

    if spec.include_bad_lines {
        let day = |n: i64| spec.start.start() + n * DAY;
        let t = day(100) + 7 * 3600;
        lines.bad(t, "UnknownTerm", format!("csv|gauge-01,wind_gust,3.2,m/s,{},-29.12,26.21", ts(t)));
        let t = day(200) + 7 * 3600;
        lines.bad(
            t,
            "Malformed",
            format!(r#"json|{{"sensor_id": "probe-02", "property": "soil_hum", "value": 12.0, "timestamp": "{}""#, ts(t)),
        );
        let t = day(300) + 7 * 3600;
        lines.bad(t, "UnknownUnit", format!("csv|gauge-01,rain,1.0,furlongs,{},-29.12,26.21", ts(t)));
        // Sorted after day 400's readings but stamped the evening before.
        let late = day(399) + 18 * 3600;
        lines.bad(day(400) + 7 * 3600, "OutOfOrder", xml_temp(late, 20.0));
        let t = day(500) + 12 * 3600;
        lines.bad(t, "OutOfSeason", ik_line(t, "peulwane_birds_calling", 1.0));
        let t = day(600) + 7 * 3600;
        lines.bad(t, "UnassignedSensor", format!("csv|gauge-99,rain,0.5,mm,{},-29.3,26.4", ts(t)));
    }

    lines.items.sort_by_key(|&(k, n, _)| (k, n));
    let baseline = (periods[0], periods[spec.baseline_months as usize - 1]);
    let drought_periods = periods[(d0 - 1) as usize..d1 as usize].to_vec();
    Scenario {
        lines: lines.items.into_iter().map(|(_, _, l)| l).collect(),
        manifest: Manifest {
            region: REGION.to_string(),
            parsed: lines.parsed,
            rejected: lines.rejected,
            baseline,
            drought_periods,
            periods,
        },
    }
}

/// Writes `dataset.txt`, `manifest.json` and a ready-to-use config set
/// into `dir`. Returns the manifest.
pub fn write_scenario(dir: &Path, spec: &ScenarioSpec) -> io::Result<Manifest> {
    fs::create_dir_all(dir)?;
    let scenario = generate(spec);
    fs::write(dir.join("dataset.txt"), scenario.dataset())?;
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&scenario.manifest)?)?;
    fs::write(dir.join("alignment.json"), ALIGNMENT_JSON)?;
    fs::write(dir.join("indicators.json"), INDICATORS_JSON)?;
    fs::write(dir.join("rules.cep"), RULES_CEP)?;
    let (b0, b1) = scenario.manifest.baseline;
    let config =
        CONFIG_TOML.replace("start = \"2020-01\"", &format!("start = \"{b0}\"")).replace("end = \"2021-12\"", &format!("end = \"{b1}\""));
    fs::write(dir.join("config.toml"), config)?;
    Ok(scenario.manifest)
}

/// The 1-based month `index` of the scenario.
pub fn month_of(spec: &ScenarioSpec, index: u32) -> Period {
    let mut p = spec.start;
    for _ in 1..index {
        p = p.next();
    }
    p
}
