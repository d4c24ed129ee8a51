//! End-to-end acceptance checks. Runs without the libtest harness and
//! prints one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeMap;
use std::io::Cursor;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use parking_lot::RwLock;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semdrought::cep::{parse_rule, Event, EventId, Firing};
use semdrought::forecast::{
    classify_severity, compute_dvi, make_bulletin, BulletinInput, Climatology, DviWeights, ForecastSettings, Period, Severity, Thresholds,
};
use semdrought::ik::{IkSignal, DRIER_SIGNAL};
use semdrought::model::time::{format_utc, DAY};
use semdrought::scenario::{generate, month_of, ScenarioSpec};
use semdrought::service::{serve, Pipeline};
use semdrought::store::TripleStore;
use serde_json::Value;

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant) -> Result<Duration, String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(took)
}

fn cross_format() -> Outcome {
    let started = Instant::now();
    let table = table();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        check_cross_format(&table, &random_observation(&mut rng))?;
    }
    let took = within(Duration::from_secs(5), started)?;
    Ok(format!("200 observations x 3 formats identical in {took:.2?}"))
}

fn inference() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut triples = 0;
    for _ in 0..100 {
        let store = random_store(&mut rng);
        let rules: Vec<_> = (0..rng.gen_range(0..=5)).map(|_| random_rule(&mut rng)).collect();
        check_saturation(&store, &rules)?;
        triples += store.len();
    }
    let took = within(Duration::from_secs(10), started)?;
    Ok(format!("100 stores ({triples} base triples) equal the naive fixpoint in {took:.2?}"))
}

fn cep() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut agg = AggregateCheck::default();
    let (mut events, mut firings) = (0, 0);
    for i in 0..50 {
        let rules = random_rules(&mut rng, 10);
        let stream = random_stream(&mut rng, 1000);
        let h = horizon(&rules, &stream);
        let expected = brute_force_firings(&rules, &stream, h, &mut agg);
        let got = engine_firings(&rules, &stream, h);
        if got != expected {
            let first = got.iter().zip(&expected).position(|(a, b)| a != b).unwrap_or(got.len().min(expected.len()));
            return Err(format!(
                "stream {i}: {} vs {} firings, first difference at #{first}: {:?} vs {:?}",
                got.len(),
                expected.len(),
                got.get(first),
                expected.get(first)
            ));
        }
        events += stream.len();
        firings += got.len();
    }
    ensure(agg.max_delta <= 1e-9, || format!("aggregate deviation {:e}", agg.max_delta))?;
    let took = within(Duration::from_secs(30), started)?;
    Ok(format!("50 streams, {events} events, {firings} firings equal; {} aggregates max |d| {:e}; {took:.2?}", agg.compared, agg.max_delta))
}

fn numeric_kernels() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..80);
        let mut pts: Vec<(i64, f64)> = (0..n).map(|_| (rng.gen_range(0..90 * DAY), rng.gen_range(-500.0..500.0))).collect();
        pts.sort_by_key(|p| p.0);
        match (semdrought::cep::slope(&pts), closed_form_slope(&pts)) {
            (Ok(a), Some(b)) => worst = worst.max((a - b).abs()),
            (Err(_), None) => {}
            (a, b) => return Err(format!("slope {a:?} vs closed form {b:?}")),
        }
    }
    ensure(worst <= 1e-9, || format!("slope deviation {worst:e}"))?;

    let table = table();
    let template = check_cross_format(
        &table,
        &LogicalObservation {
            sensor: "probe-02".into(),
            property: "soil_hum".into(),
            unit: "%".into(),
            value: 0.0,
            timestamp: 0,
            location: None,
        },
    )?;
    let mut worst_clim: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..120);
        let scale = 10f64.powi(rng.gen_range(-2..3));
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0) * scale).collect();
        let obs: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut o = template.clone();
                o.value = v;
                o.timestamp = i as i64 * 3600;
                o
            })
            .collect();
        let clim = Climatology::build(&obs, 5);
        let e = clim.get(&template.property, 1).ok_or("missing climatology entry")?;
        // Two passes: mean first, then squared deviations about it.
        let mut sum = 0.0;
        for v in &values {
            sum += v;
        }
        let mean = sum / n as f64;
        let mut ss = 0.0;
        for v in &values {
            ss += (v - mean).powi(2);
        }
        let sd = (ss / (n as f64 - 1.0)).sqrt();
        worst_clim = worst_clim.max((e.mean - mean).abs()).max((e.std_dev - sd).abs());
    }
    ensure(worst_clim <= 1e-9, || format!("climatology deviation {worst_clim:e}"))?;
    Ok(format!("1000 slopes max |d| {worst:e}; 1000 climatologies max |d| {worst_clim:e}"))
}

fn bulletin_fixture(rng: &mut ChaCha8Rng) -> (Vec<semdrought::model::CanonicalObservation>, Climatology, Period) {
    let table = table();
    let mut obs = Vec::new();
    let period = Period::new(2023, 5).unwrap();
    for (sensor, term, unit, mean) in
        [("gauge-01", "rain", "mm", 3.0), ("probe-02", "soil_hum", "%", 25.0), ("thermo-03", "air_temp", "degC", 15.0)]
    {
        for year in 2018..=2023 {
            for day in 0..10 {
                let ts = Period::new(year, 5).unwrap().start() + day * DAY + 6 * 3600;
                let o = LogicalObservation {
                    sensor: sensor.into(),
                    property: term.into(),
                    unit: unit.into(),
                    value: mean + rng.gen_range(-2.0..2.0),
                    timestamp: ts,
                    location: None,
                };
                obs.push(check_cross_format(&table, &o).unwrap());
            }
        }
    }
    let baseline: Vec<_> = obs.iter().filter(|o| o.timestamp < period.start()).cloned().collect();
    (obs, Climatology::build(&baseline, 5), period)
}

fn dvi_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = DviWeights::default();
    let t = Thresholds::default();
    for _ in 0..10_000 {
        let (zp, sm, zt, ik) = (rng.gen_range(-6.0..6.0), rng.gen_range(0.0..=1.0), rng.gen_range(-6.0..6.0), rng.gen_range(-1.0..=1.0));
        let dvi = |zp: f64, sm: f64, zt: f64, ik: f64| compute_dvi(zp, sm, zt, ik, &w).unwrap();
        let base = dvi(zp, sm, zt, ik);
        ensure((0.0..=1.0).contains(&base), || format!("dvi {base} out of range"))?;
        let d: f64 = rng.gen_range(0.0..1.0);
        let drier =
            [dvi(zp - d, sm, zt, ik), dvi(zp, (sm - d).max(0.0), zt, ik), dvi(zp, sm, zt + d, ik), dvi(zp, sm, zt, (ik + d).min(1.0))];
        ensure(drier.iter().all(|&x| x >= base), || format!("not monotone at {:?}", (zp, sm, zt, ik)))?;
    }
    let below = |x: f64| f64::from_bits(x.to_bits() - 1);
    for (edge, at, under) in
        [(0.25, Severity::Watch, Severity::None), (0.5, Severity::Warning, Severity::Watch), (0.75, Severity::Severe, Severity::Warning)]
    {
        ensure(classify_severity(edge, &t) == at && classify_severity(below(edge), &t) == under, || format!("boundary {edge}"))?;
    }

    let (obs, clim, period) = bulletin_fixture(&mut rng);
    let settings = ForecastSettings { weights: DviWeights { precip: 0.5, soil: 0.3, temp: 0.2, ik: 0.0 }, ..ForecastSettings::default() };
    let ns = semdrought::model::Namespace::default();
    let bulletin = |ik: IkSignal, firings: &[Firing]| {
        make_bulletin(&BulletinInput { region: "free_state", period, observations: &obs, climatology: &clim, firings, ik }, &settings, &ns)
            .map_err(|e| e.to_string())
    };
    let reference = bulletin(IkSignal::default(), &[])?;
    for i in 0..1000 {
        let ik = IkSignal { value: rng.gen_range(-1.0..=1.0), support: rng.gen_range(0..20) };
        let firings: Vec<Firing> = (0..rng.gen_range(0..4))
            .map(|k| Firing {
                rule: "ik_drier".into(),
                window_end: period.start() + (k + 1) * DAY,
                event: Event::new(DRIER_SIGNAL, period.start() + (k + 1) * DAY, Some(0.4)),
                event_id: EventId(i * 10 + k as u64),
                evidence: vec![],
            })
            .collect();
        let b = bulletin(ik, &firings)?;
        ensure(b == reference, || format!("bulletin changed under IK perturbation {ik:?}"))?;
    }
    ensure(!reference.evidence.is_empty(), || "empty evidence".into())?;
    Ok("10000 tuples in range and monotone; boundaries exact; 1000 IK perturbations leave ablated bulletins unchanged".into())
}

fn drought_scenario() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let started = Instant::now();
    let (config, manifest) = scenario_config(dir.path(), None);
    let mut pipeline = Pipeline::new(&config).map_err(|e| e.to_string())?;
    let data = std::fs::read_to_string(dir.path().join("dataset.txt")).map_err(|e| e.to_string())?;
    let summary = pipeline.replay(Cursor::new(data), 0.0).map_err(|e| e.to_string())?;
    ensure(summary.parsed == manifest.parsed && summary.rejected == manifest.rejected, || {
        format!("summary {summary:?} vs manifest {} / {:?}", manifest.parsed, manifest.rejected)
    })?;

    let spec = ScenarioSpec::default();
    let mut severities = BTreeMap::new();
    for (i, &period) in manifest.periods.iter().enumerate() {
        let index = i as u32 + 1;
        let b = pipeline.forecast(&manifest.region, period).map_err(|e| format!("{period}: {e}"))?;
        ensure(!b.evidence.is_empty(), || format!("{period}: empty evidence"))?;
        if manifest.drought_periods.contains(&period) {
            ensure(b.report.severity >= Severity::Warning, || format!("{period}: {}", b.summary))?;
        }
        if index <= spec.baseline_months {
            ensure(b.report.severity <= Severity::Watch, || format!("{period}: {}", b.summary))?;
        }
        severities.insert(period, b.report.severity);
    }
    let drier: Vec<&str> = pipeline
        .firing_log()
        .iter()
        .filter(|f| f.firing.rule == "ik_drier" && manifest.drought_periods.contains(&Period::containing(f.firing.window_end)))
        .map(|f| f.region.as_str())
        .collect();
    ensure(!drier.is_empty(), || "ik_drier never fired in the drought months".into())?;
    let took = within(Duration::from_secs(10), started)?;
    let (d0, d1) = spec.drought;
    let drought: Vec<String> = (d0..=d1).map(|m| format!("{:?}", severities[&month_of(&spec, m)])).collect();
    Ok(format!(
        "{} records, {} rejected as manifested; months {d0}-{d1}: {}; ik_drier fired {} times; {took:.2?}",
        summary.parsed,
        summary.rejected.values().sum::<usize>(),
        drought.join("/"),
        drier.len()
    ))
}

fn determinism() -> Outcome {
    let run = || -> Result<(Pipeline, tempfile::TempDir), String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let state = dir.path().join("state");
        std::fs::create_dir_all(&state).map_err(|e| e.to_string())?;
        let (config, _) = scenario_config(dir.path(), Some(&state));
        let mut p = Pipeline::open(&config).map_err(|e| e.to_string())?;
        let data = std::fs::read_to_string(dir.path().join("dataset.txt")).map_err(|e| e.to_string())?;
        p.replay(Cursor::new(data), 0.0).map_err(|e| e.to_string())?;
        Ok((p, dir))
    };
    let (a, dir_a) = run()?;
    let (b, dir_b) = run()?;
    ensure(a.firing_log() == b.firing_log(), || "firing logs differ".into())?;
    let (sa, sb) = (a.store().serialize(), b.store().serialize());
    ensure(sa == sb, || "exported stores differ".into())?;
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join("state").join(f)).map_err(|e| e.to_string());
    for f in ["store.nt", "firings.jsonl", "ik_log.jsonl"] {
        ensure(read(&dir_a, f)? == read(&dir_b, f)?, || format!("{f} differs between runs"))?;
    }
    let exported = String::from_utf8(read(&dir_a, "store.nt")?).map_err(|e| e.to_string())?;
    let loaded = TripleStore::load(&exported).map_err(|e| e.to_string())?;
    ensure(loaded.triple_set() == a.store().triple_set(), || "export/load round trip not set-equal".into())?;
    Ok(format!("{} firings and {} triples identical across runs; export/load set-equal", a.firing_log().len(), loaded.len()))
}

fn http_json(resp: reqwest::blocking::Response) -> Result<(u16, Value), String> {
    let status = resp.status().as_u16();
    let body = resp.json::<Value>().map_err(|e| e.to_string())?;
    Ok((status, body))
}

fn dissemination() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (config, manifest) = scenario_config(dir.path(), None);
    let rule_count = config.rules.len();
    // Hold back the last five days so the posted records are in order.
    let scenario = generate(&ScenarioSpec::default());
    let kept = &scenario.lines[..scenario.lines.len() - 15];
    let mut pipeline = Pipeline::new(&config).map_err(|e| e.to_string())?;
    pipeline.replay(Cursor::new(kept.join("\n")), 0.0).map_err(|e| e.to_string())?;
    let period = *manifest.periods.last().unwrap();

    let listener = std::net::TcpListener::bind("127.0.0.1:0").map_err(|e| e.to_string())?;
    listener.set_nonblocking(true).map_err(|e| e.to_string())?;
    let addr = listener.local_addr().map_err(|e| e.to_string())?;
    let state = Arc::new(RwLock::new(pipeline));
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).unwrap();
            serve(state, listener, async {
                let _ = stopped.await;
            })
            .await
        })
    });

    let base = format!("http://{addr}");
    let client = reqwest::blocking::Client::new();
    let forecast_url = format!("{base}/forecast?region={}&period={period}", manifest.region);
    let result = (|| -> Outcome {
        let (status, before) = http_json(client.get(&forecast_url).send().map_err(|e| e.to_string())?)?;
        ensure(status == 200, || format!("forecast before: {status} {before}"))?;

        let t_obs = period.end() - 3 * DAY + 6 * 3600;
        let obs = serde_json::json!({
            "sensor_id": "gauge-01", "property": "rain", "value": 40.0, "unit": "mm",
            "timestamp": format_utc(t_obs).unwrap(),
        });
        let (status, body) = http_json(client.post(format!("{base}/observations")).json(&obs).send().map_err(|e| e.to_string())?)?;
        ensure(status == 200 && body["status"] == "accepted", || format!("POST /observations: {status} {body}"))?;

        let ik = serde_json::json!({
            "indicator_id": "peulwane_birds_calling", "timestamp": format_utc(t_obs + 3600).unwrap(),
            "region": manifest.region, "confidence": 1.0,
        });
        let (status, body) = http_json(client.post(format!("{base}/ik")).json(&ik).send().map_err(|e| e.to_string())?)?;
        ensure(status == 200 && body["status"] == "accepted", || format!("POST /ik: {status} {body}"))?;

        let (status, after) = http_json(client.get(&forecast_url).send().map_err(|e| e.to_string())?)?;
        ensure(status == 200, || format!("forecast after: {status} {after}"))?;
        let total = |b: &Value| b["precip_total"].as_f64().unwrap_or(f64::NAN);
        let support = |b: &Value| b["ik"]["support"].as_u64().unwrap_or(0);
        ensure((total(&after) - total(&before) - 40.0).abs() < 1e-9, || {
            format!("precipitation total {} -> {}", total(&before), total(&after))
        })?;
        ensure(support(&after) == support(&before) + 1, || format!("IK support {} -> {}", support(&before), support(&after)))?;
        let evidence = after["evidence"].as_array().cloned().unwrap_or_default();
        ensure(!evidence.is_empty(), || "evidence is empty".into())?;
        ensure(evidence.iter().any(|e| e["kind"] == "ik" && e["support"] == support(&after)), || format!("no IK evidence: {after}"))?;

        let (status, health) = http_json(client.get(format!("{base}/health")).send().map_err(|e| e.to_string())?)?;
        let health_ok =
            status == 200 && health.as_object().is_some_and(|o| o.len() == 2) && health["status"] == "ok" && health["events"].is_u64();
        ensure(health_ok, || format!("/health: {status} {health}"))?;

        let (status, rules) = http_json(client.get(format!("{base}/rules")).send().map_err(|e| e.to_string())?)?;
        let texts = rules["rules"].as_array().cloned().unwrap_or_default();
        ensure(status == 200 && texts.len() == rule_count, || format!("/rules: {status} {rules}"))?;
        for t in &texts {
            let text = t.as_str().ok_or("rule is not a string")?;
            parse_rule(text).map_err(|e| format!("/rules entry `{text}`: {e}"))?;
        }
        Ok(format!(
            "{} -> {}; precipitation total +40 mm; IK support {} -> {}; {} evidence items; {} rules",
            before["severity"],
            after["severity"],
            support(&before),
            support(&after),
            evidence.len(),
            texts.len()
        ))
    })();
    let _ = stop.send(());
    server.join().map_err(|_| "server thread panicked".to_string())?.map_err(|e| e.to_string())?;
    result
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("cross-format equivalence", cross_format),
        ("inference oracle", inference),
        ("CEP oracle", cep),
        ("numeric kernels", numeric_kernels),
        ("DVI properties", dvi_properties),
        ("end-to-end drought scenario", drought_scenario),
        ("determinism and persistence", determinism),
        ("dissemination contract", dissemination),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
