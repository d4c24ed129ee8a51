//! Generators and independent reference implementations shared by the
//! property tests and the acceptance harness.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use semdrought::cep::{window_aggregate, AggFn, CepRule, Cmp, Engine, Event, KindRef, PatternExpr, WindowSpec};
use semdrought::ingest::{canonicalize, parse_csv_line, parse_json_observation, parse_xml_observation, AlignmentTable, CsvSchema};
use semdrought::model::time::{format_utc, DAY};
use semdrought::model::{canonical_double, observation_to_triples, CanonicalObservation, Namespace, Term, Triple, Vocabulary};
use semdrought::scenario::{write_scenario, Manifest, ScenarioSpec};
use semdrought::service::{load_config, Config};
use semdrought::store::{InferenceRule, PatternTerm, TriplePattern, TripleStore};

pub fn table() -> AlignmentTable {
    AlignmentTable::from_json(semdrought::scenario::ALIGNMENT_JSON, Vocabulary::standard(Namespace::default())).unwrap()
}

// ---------------------------------------------------------------- ingest

/// One observation before rendering into a wire format.
#[derive(Debug, Clone)]
pub struct LogicalObservation {
    pub sensor: String,
    pub property: String,
    pub unit: String,
    pub value: f64,
    pub timestamp: i64,
    /// `None` falls back on the sensor's station coordinates.
    pub location: Option<(f64, f64)>,
}

const TERMS: [(&str, &[&str]); 5] =
    [("rain", &["mm", "in"]), ("SOIL_HUM", &["%"]), ("air_temp", &["degC", "degF"]), ("rh", &["%RH"]), ("Wind", &["m/s", "km/h"])];

pub fn random_observation(rng: &mut impl Rng) -> LogicalObservation {
    let (property, units) = TERMS[rng.gen_range(0..TERMS.len())];
    let sensor = ["gauge-01", "probe-02", "thermo-03", "field-17", "Field-18"].choose(rng).unwrap().to_string();
    let stationed = !sensor.starts_with(['f', 'F']);
    let location = if stationed && rng.gen_bool(0.5) { None } else { Some((rng.gen_range(-90.0..=90.0), rng.gen_range(-180.0..=180.0))) };
    let value = match rng.gen_range(0..4) {
        0 => 0.0,
        1 => rng.gen_range(-1e-4..1e-4),
        2 => rng.gen_range(-1e8..1e8),
        _ => rng.gen_range(-50.0..150.0),
    };
    LogicalObservation {
        sensor,
        property: property.to_string(),
        unit: units.choose(rng).unwrap().to_string(),
        value,
        timestamp: rng.gen_range(0..4_102_444_800),
        location,
    }
}

pub fn render_csv(o: &LogicalObservation) -> String {
    let (lat, lon) = o.location.map(|(a, b)| (canonical_double(a), canonical_double(b))).unwrap_or_default();
    format!("{},{},{},{},{},{},{}", o.sensor, o.property, canonical_double(o.value), o.unit, format_utc(o.timestamp).unwrap(), lat, lon)
}

pub fn render_json(o: &LogicalObservation) -> String {
    let mut doc = serde_json::json!({
        "sensor_id": o.sensor,
        "property": o.property,
        "value": o.value,
        "unit": o.unit,
        "timestamp": format_utc(o.timestamp).unwrap(),
    });
    if let Some((lat, lon)) = o.location {
        doc["lat"] = lat.into();
        doc["lon"] = lon.into();
    }
    doc.to_string()
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_xml(o: &LogicalObservation) -> String {
    let loc = o
        .location
        .map(|(lat, lon)| format!("<lat>{}</lat><lon>{}</lon>", canonical_double(lat), canonical_double(lon)))
        .unwrap_or_default();
    format!(
        r#"<Observation><procedure>{}</procedure><observedProperty>{}</observedProperty><result uom="{}">{}</result><time>{}</time>{loc}</Observation>"#,
        xml_escape(&o.sensor),
        xml_escape(&o.property),
        xml_escape(&o.unit),
        canonical_double(o.value),
        format_utc(o.timestamp).unwrap()
    )
}

fn sorted_triples(ns: &Namespace, obs: &CanonicalObservation) -> String {
    let mut lines: Vec<String> = observation_to_triples(ns, obs).unwrap().iter().map(ToString::to_string).collect();
    lines.sort();
    lines.join("\n")
}

/// Canonicalizes all three renderings and compares fields and triples.
pub fn check_cross_format(table: &AlignmentTable, o: &LogicalObservation) -> Result<CanonicalObservation, String> {
    let ns = table.vocabulary().namespace().clone();
    let csv = parse_csv_line(&render_csv(o), &CsvSchema::default()).map_err(|e| format!("csv: {e}"))?;
    let json = parse_json_observation(&render_json(o)).map_err(|e| format!("json: {e}"))?;
    let xml = parse_xml_observation(&render_xml(o)).map_err(|e| format!("xml: {e}"))?;
    let c = canonicalize(&csv, table).map_err(|e| format!("csv: {e}"))?;
    let j = canonicalize(&json, table).map_err(|e| format!("json: {e}"))?;
    let x = canonicalize(&xml, table).map_err(|e| format!("xml: {e}"))?;
    let same = |a: &CanonicalObservation, b: &CanonicalObservation| {
        a.id == b.id
            && a.sensor_id == b.sensor_id
            && a.property == b.property
            && a.unit == b.unit
            && a.value.to_bits() == b.value.to_bits()
            && a.timestamp == b.timestamp
            && a.lat.to_bits() == b.lat.to_bits()
            && a.lon.to_bits() == b.lon.to_bits()
    };
    if !same(&c, &j) || !same(&c, &x) {
        return Err(format!("fields differ for {o:?}:\n{c:?}\n{j:?}\n{x:?}"));
    }
    let (tc, tj, tx) = (sorted_triples(&ns, &c), sorted_triples(&ns, &j), sorted_triples(&ns, &x));
    if tc != tj || tc != tx {
        return Err(format!("serialized triples differ for {o:?}"));
    }
    Ok(c)
}

// ------------------------------------------------------------- inference

fn node(i: usize) -> Term {
    Term::iri(&format!("http://oracle.test/n{i}")).unwrap()
}

fn pred(i: usize) -> Term {
    Term::iri(&format!("http://oracle.test/p{i}")).unwrap()
}

fn object(rng: &mut impl Rng) -> Term {
    if rng.gen_bool(0.1) {
        Term::Literal(semdrought::model::Literal::double(rng.gen_range(0..3) as f64).unwrap())
    } else {
        node(rng.gen_range(0..6))
    }
}

pub fn random_store(rng: &mut impl Rng) -> Vec<Triple> {
    let n = rng.gen_range(0..=50);
    (0..n).map(|_| Triple::from_terms(node(rng.gen_range(0..6)), pred(rng.gen_range(0..3)), object(rng)).unwrap()).collect()
}

fn pattern_term(rng: &mut impl Rng, vars: &[&str], constant: impl FnOnce(&mut dyn rand::RngCore) -> Term) -> PatternTerm {
    if rng.gen_bool(0.7) {
        PatternTerm::Var(vars.choose(rng).unwrap().to_string())
    } else {
        PatternTerm::Term(constant(rng))
    }
}

/// A random range-restricted rule: head variables are drawn from the body.
pub fn random_rule(rng: &mut impl Rng) -> InferenceRule {
    let vars = ["x", "y", "z"];
    let len = rng.gen_range(1..=3);
    let body: Vec<TriplePattern> = (0..len)
        .map(|_| {
            let s = pattern_term(rng, &vars, |r| node(r.gen_range(0..6)));
            let p = if rng.gen_bool(0.15) {
                PatternTerm::Var(vars.choose(rng).unwrap().to_string())
            } else {
                PatternTerm::Term(pred(rng.gen_range(0..3)))
            };
            let o = pattern_term(rng, &vars, |r| {
                if r.gen_bool(0.1) {
                    Term::Literal(semdrought::model::Literal::double(r.gen_range(0..3) as f64).unwrap())
                } else {
                    node(r.gen_range(0..6))
                }
            });
            TriplePattern::new(s, p, o)
        })
        .collect();
    let bound: Vec<String> = body.iter().flat_map(|p| p.variables()).map(str::to_string).collect::<BTreeSet<_>>().into_iter().collect();
    let (cs, co) = (node(rng.gen_range(0..6)), node(rng.gen_range(0..6)));
    let mut pick = |constant: Term| -> PatternTerm {
        if !bound.is_empty() && rng.gen_bool(0.8) {
            PatternTerm::Var(bound.choose(rng).unwrap().clone())
        } else {
            PatternTerm::Term(constant)
        }
    };
    let s = pick(cs);
    let o = pick(co);
    let p = PatternTerm::Term(pred(rng.gen_range(0..4)));
    InferenceRule::new(body, TriplePattern::new(s, p, o)).unwrap()
}

fn oracle_match(pt: &PatternTerm, term: &Term, b: &mut BTreeMap<String, Term>) -> bool {
    match pt {
        PatternTerm::Term(t) => t == term,
        PatternTerm::Var(v) => match b.get(v) {
            Some(bound) => bound == term,
            None => {
                b.insert(v.clone(), term.clone());
                true
            }
        },
    }
}

fn oracle_subst(pt: &PatternTerm, b: &BTreeMap<String, Term>) -> Term {
    match pt {
        PatternTerm::Term(t) => t.clone(),
        PatternTerm::Var(v) => b[v].clone(),
    }
}

/// Naive forward chaining: apply every rule to the whole set until nothing
/// changes.
pub fn naive_fixpoint(triples: &[Triple], rules: &[InferenceRule]) -> BTreeSet<Triple> {
    let mut facts: BTreeSet<Triple> = triples.iter().cloned().collect();
    loop {
        let mut derived = Vec::new();
        for rule in rules {
            let mut bindings = vec![BTreeMap::new()];
            for pat in rule.body() {
                let mut next = Vec::new();
                for b in &bindings {
                    for t in &facts {
                        let mut nb = b.clone();
                        let pred_term = Term::Iri(t.predicate().clone());
                        if oracle_match(&pat.subject, t.subject(), &mut nb)
                            && oracle_match(&pat.predicate, &pred_term, &mut nb)
                            && oracle_match(&pat.object, t.object(), &mut nb)
                        {
                            next.push(nb);
                        }
                    }
                }
                bindings = next;
            }
            let h = rule.head();
            for b in &bindings {
                let t = Triple::from_terms(oracle_subst(&h.subject, b), oracle_subst(&h.predicate, b), oracle_subst(&h.object, b));
                if let Ok(t) = t {
                    derived.push(t);
                }
            }
        }
        let before = facts.len();
        facts.extend(derived);
        if facts.len() == before {
            return facts;
        }
    }
}

pub fn check_saturation(triples: &[Triple], rules: &[InferenceRule]) -> Result<(), String> {
    let mut store = TripleStore::new();
    store.extend(triples.iter().cloned());
    store.saturate(rules);
    let expected = naive_fixpoint(triples, rules);
    let got = store.triple_set();
    if got == expected {
        Ok(())
    } else {
        let rules: Vec<String> = rules.iter().map(ToString::to_string).collect();
        Err(format!(
            "saturation differs: {} vs {} triples\nrules: {rules:#?}\nmissing: {:?}\nextra: {:?}",
            got.len(),
            expected.len(),
            expected.difference(&got).collect::<Vec<_>>(),
            got.difference(&expected).collect::<Vec<_>>()
        ))
    }
}

// ------------------------------------------------------------------- CEP

pub const INPUT_KINDS: [&str; 3] = ["A", "B", "C"];
pub const EMIT_KINDS: [&str; 3] = ["E0", "E1", "E2"];

fn kind(rng: &mut impl Rng) -> KindRef {
    let k = if rng.gen_bool(0.8) { INPUT_KINDS.choose(rng) } else { EMIT_KINDS.choose(rng) };
    KindRef::Name(k.unwrap().to_string())
}

fn cmp(rng: &mut impl Rng) -> Cmp {
    *[Cmp::Lt, Cmp::Le, Cmp::Gt, Cmp::Ge, Cmp::Eq, Cmp::Ne].choose(rng).unwrap()
}

fn value_predicate(rng: &mut impl Rng) -> PatternExpr {
    match rng.gen_range(0..3) {
        0 => PatternExpr::Threshold { kind: kind(rng), cmp: cmp(rng), constant: rng.gen_range(0.0..100.0) },
        1 => {
            let func = *[AggFn::Avg, AggFn::Min, AggFn::Max, AggFn::Sum, AggFn::Count].choose(rng).unwrap();
            let constant = match func {
                AggFn::Count => rng.gen_range(0..6) as f64,
                AggFn::Sum => rng.gen_range(0.0..400.0),
                _ => rng.gen_range(0.0..100.0),
            };
            PatternExpr::Aggregate { func, kind: kind(rng), cmp: cmp(rng), constant }
        }
        _ => {
            let magnitude = rng.gen_range(0.5..200.0);
            let constant = if rng.gen_bool(0.5) { magnitude } else { -magnitude };
            PatternExpr::Trend { kind: kind(rng), cmp: cmp(rng), constant }
        }
    }
}

pub fn random_pattern(rng: &mut impl Rng, depth: u32) -> PatternExpr {
    let leaf_only = depth == 0;
    match rng.gen_range(0..if leaf_only { 4 } else { 7 }) {
        0 | 1 => value_predicate(rng),
        2 => PatternExpr::Seq { first: kind(rng), then: kind(rng) },
        3 => PatternExpr::Absent { kind: kind(rng) },
        4 => PatternExpr::And((0..rng.gen_range(2..=3)).map(|_| random_pattern(rng, depth - 1)).collect()),
        5 => PatternExpr::Or((0..rng.gen_range(2..=3)).map(|_| random_pattern(rng, depth - 1)).collect()),
        _ => PatternExpr::Not(Box::new(value_predicate(rng))),
    }
}

pub fn random_rules(rng: &mut impl Rng, max: usize) -> Vec<CepRule> {
    let n = rng.gen_range(1..=max);
    (0..n)
        .map(|i| {
            let length = [3_600, 2 * 3_600, 6 * 3_600, DAY].choose(rng).copied().unwrap();
            let window = if rng.gen_bool(0.5) {
                let step = [1_800, 3_600, length].choose(rng).copied().unwrap().min(length);
                WindowSpec::sliding(length, step)
            } else {
                WindowSpec::tumbling(length)
            };
            CepRule {
                name: format!("r{i:02}"),
                window,
                pattern: random_pattern(rng, 2),
                emit: EMIT_KINDS.choose(rng).unwrap().to_string(),
                severity: (rng.gen_range(0..=100) as f64) / 100.0,
            }
        })
        .collect()
}

/// Non-decreasing timestamps with deliberate ties; about one in ten events
/// carries no value.
pub fn random_stream(rng: &mut impl Rng, max_len: usize) -> Vec<Event> {
    let n = rng.gen_range(1..=max_len);
    let mut t = rng.gen_range(0..10 * DAY);
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.8) {
                t += rng.gen_range(0..3 * 3_600);
            }
            let value = (!rng.gen_bool(0.1)).then(|| rng.gen_range(0.0..100.0));
            Event::new(*INPUT_KINDS.choose(rng).unwrap(), t, value)
        })
        .collect()
}

/// A firing in engine-independent form: evidence is a sorted multiset of
/// `(kind, timestamp, value bits)`.
pub type Observed = (i64, String, String, u64, Vec<(String, i64, Option<u64>)>);

#[derive(Clone)]
struct OEvent {
    kind: String,
    ts: i64,
    value: Option<f64>,
    // Input events sort before events emitted at the same instant.
    emitted: bool,
    seq: usize,
}

fn key_of(e: &OEvent) -> (String, i64, Option<u64>) {
    (e.kind.clone(), e.ts, e.value.map(f64::to_bits))
}

/// Largest |engine - naive| over every aggregate the oracle evaluated.
#[derive(Default)]
pub struct AggregateCheck {
    pub compared: usize,
    pub max_delta: f64,
}

fn naive_aggregate(func: AggFn, xs: &[f64]) -> Option<f64> {
    match func {
        AggFn::Count => Some(xs.len() as f64),
        AggFn::Sum => {
            let mut s = 0.0;
            for x in xs {
                s += x;
            }
            Some(s)
        }
        _ if xs.is_empty() => None,
        AggFn::Avg => {
            let mut s = 0.0;
            for x in xs {
                s += x;
            }
            Some(s / xs.len() as f64)
        }
        AggFn::Min => xs.iter().copied().reduce(|a, b| if b < a { b } else { a }),
        AggFn::Max => xs.iter().copied().reduce(|a, b| if b > a { b } else { a }),
    }
}

/// Closed-form least squares over days since the first point:
/// `(n Σxy − Σx Σy) / (n Σx² − (Σx)²)`.
pub fn closed_form_slope(points: &[(i64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let t0 = points[0].0;
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxy, mut sxx) = (0.0, 0.0, 0.0, 0.0);
    for &(t, y) in points {
        let x = (t - t0) as f64 / DAY as f64;
        sx += x;
        sy += y;
        sxy += x * y;
        sxx += x * x;
    }
    let den = n * sxx - sx * sx;
    if points.iter().all(|p| p.0 == t0) {
        return None;
    }
    Some((n * sxy - sx * sy) / den)
}

fn oracle_eval(p: &PatternExpr, w: &[&OEvent], agg: &mut AggregateCheck) -> Option<Vec<usize>> {
    let of = |k: &KindRef| -> Vec<&OEvent> { w.iter().copied().filter(|e| e.kind == k.as_str()).collect() };
    let valued = |k: &KindRef| -> Vec<&OEvent> { of(k).into_iter().filter(|e| e.value.is_some()).collect() };
    match p {
        PatternExpr::Threshold { kind, cmp, constant } => {
            let hits: Vec<usize> = valued(kind).iter().filter(|e| cmp.holds(e.value.unwrap(), *constant)).map(|e| e.seq).collect();
            (!hits.is_empty()).then_some(hits)
        }
        PatternExpr::Aggregate { func, kind, cmp, constant } => {
            let members = if *func == AggFn::Count { of(kind) } else { valued(kind) };
            let xs: Vec<f64> = members.iter().map(|e| e.value.unwrap_or(0.0)).collect();
            let naive = naive_aggregate(*func, &xs);
            let pairs: Vec<(i64, f64)> = members.iter().map(|e| (e.ts, e.value.unwrap_or(0.0))).collect();
            if let (Some(a), Ok(b)) = (naive, window_aggregate(&pairs, *func)) {
                agg.compared += 1;
                agg.max_delta = agg.max_delta.max((a - b).abs());
            }
            let v = naive?;
            cmp.holds(v, *constant).then(|| members.iter().map(|e| e.seq).collect())
        }
        PatternExpr::Trend { kind, cmp, constant } => {
            let members = valued(kind);
            let pts: Vec<(i64, f64)> = members.iter().map(|e| (e.ts, e.value.unwrap())).collect();
            let s = closed_form_slope(&pts)?;
            cmp.holds(s, *constant).then(|| members.iter().map(|e| e.seq).collect())
        }
        PatternExpr::Seq { first, then } => {
            let mut out = Vec::new();
            let mut pos = 0;
            while let Some(ai) = (pos..w.len()).find(|&i| w[i].kind == first.as_str()) {
                let Some(bi) = (ai + 1..w.len()).find(|&i| w[i].kind == then.as_str() && w[i].ts > w[ai].ts) else { break };
                out.push(w[ai].seq);
                out.push(w[bi].seq);
                pos = bi + 1;
            }
            (!out.is_empty()).then_some(out)
        }
        PatternExpr::Absent { kind } => of(kind).is_empty().then(Vec::new),
        PatternExpr::And(xs) => {
            let mut all = Vec::new();
            for x in xs {
                all.extend(oracle_eval(x, w, agg)?);
            }
            Some(all)
        }
        PatternExpr::Or(xs) => {
            let results: Vec<Vec<usize>> = xs.iter().filter_map(|x| oracle_eval(x, w, agg)).collect();
            (!results.is_empty()).then(|| results.concat())
        }
        PatternExpr::Not(x) => oracle_eval(x, w, agg).is_none().then(Vec::new),
    }
}

/// Re-scans every window from scratch over the full history, evaluating
/// window ends up to `horizon` in time order.
pub fn brute_force_firings(rules: &[CepRule], stream: &[Event], horizon: i64, agg: &mut AggregateCheck) -> Vec<Observed> {
    let mut rules = rules.to_vec();
    rules.sort_by(|a, b| a.name.cmp(&b.name));
    let Some(first) = stream.first() else { return Vec::new() };
    let inputs: Vec<OEvent> = stream
        .iter()
        .enumerate()
        .map(|(i, e)| OEvent { kind: e.kind.clone(), ts: e.timestamp, value: e.value, emitted: false, seq: i })
        .collect();
    // Everything seen so far, indexed by seq; emitted events are appended.
    let mut all = inputs.clone();
    let mut emitted: Vec<OEvent> = Vec::new();
    let mut ends: BTreeSet<i64> = BTreeSet::new();
    for r in &rules {
        let p = r.window.period();
        let mut e = (first.timestamp + p - 1).div_euclid(p) * p;
        while e <= horizon {
            ends.insert(e);
            e += p;
        }
    }
    let mut out = Vec::new();
    for &end in &ends {
        let mut fresh = Vec::new();
        for r in &rules {
            let p = r.window.period();
            let start = (first.timestamp + p - 1).div_euclid(p) * p;
            if end < start || (end - start) % p != 0 {
                continue;
            }
            let lo = end - r.window.length;
            // Both lists are in timestamp order, so slicing by time is a
            // plain range lookup; the window itself is rebuilt from scratch.
            let range = |xs: &[OEvent], hi_inclusive: bool| -> (usize, usize) {
                let a = xs.partition_point(|e| e.ts <= lo);
                let b = xs.partition_point(|e| if hi_inclusive { e.ts <= end } else { e.ts < end });
                (a, b.max(a))
            };
            let (ia, ib) = range(&inputs, true);
            let (ea, eb) = range(&emitted, false);
            let mut window: Vec<&OEvent> = inputs[ia..ib].iter().chain(&emitted[ea..eb]).collect();
            window.sort_by_key(|e| (e.ts, e.emitted, e.seq));
            if let Some(ids) = oracle_eval(&r.pattern, &window, agg) {
                let ids: BTreeSet<usize> = ids.into_iter().collect();
                let mut evidence: Vec<_> = ids.iter().map(|&i| key_of(&all[i])).collect();
                evidence.sort();
                fresh.push((r.emit.clone(), r.severity, r.name.clone(), evidence));
            }
        }
        for (emit, severity, name, evidence) in fresh {
            let e = OEvent { kind: emit.clone(), ts: end, value: Some(severity), emitted: true, seq: all.len() };
            all.push(e.clone());
            emitted.push(e);
            out.push((end, name, emit, severity.to_bits(), evidence));
        }
    }
    out
}

/// Pushes the stream through the engine, then advances to `horizon`.
pub fn engine_firings(rules: &[CepRule], stream: &[Event], horizon: i64) -> Vec<Observed> {
    let mut engine = Engine::new(rules.to_vec()).unwrap();
    let mut by_id: BTreeMap<u64, (String, i64, Option<u64>)> = BTreeMap::new();
    let mut firings = Vec::new();
    let mut record = |fs: Vec<semdrought::cep::Firing>, by_id: &mut BTreeMap<u64, _>| {
        for f in fs {
            by_id.insert(f.event_id.0, (f.event.kind.clone(), f.event.timestamp, f.event.value.map(f64::to_bits)));
            firings.push(f);
        }
    };
    for e in stream {
        let fs = engine.push_event(e.clone()).unwrap();
        record(fs, &mut by_id);
        let id = engine.last_event_id().unwrap().0;
        by_id.insert(id, (e.kind.clone(), e.timestamp, e.value.map(f64::to_bits)));
    }
    let fs = engine.advance_to(horizon).unwrap();
    record(fs, &mut by_id);
    firings
        .into_iter()
        .map(|f| {
            let mut evidence: Vec<_> = f.evidence.iter().map(|id| by_id[&id.0].clone()).collect();
            evidence.sort();
            (f.window_end, f.rule, f.event.kind, f.event.value.unwrap().to_bits(), evidence)
        })
        .collect()
}

pub fn horizon(rules: &[CepRule], stream: &[Event]) -> i64 {
    let max_len = rules.iter().map(|r| r.window.length).max().unwrap_or(0);
    stream.last().map(|e| e.timestamp).unwrap_or(0) + max_len
}

// -------------------------------------------------------------- scenario

/// Writes the default scenario into `dir` and loads its config, optionally
/// with persistence enabled.
pub fn scenario_config(dir: &Path, persistence: Option<&Path>) -> (Config, Manifest) {
    let manifest = write_scenario(dir, &ScenarioSpec::default()).unwrap();
    let path = dir.join("config.toml");
    if let Some(p) = persistence {
        let mut text = std::fs::read_to_string(&path).unwrap();
        text = format!("persistence_dir = {:?}\n{text}", p.display().to_string());
        std::fs::write(&path, text).unwrap();
    }
    (load_config(&path).unwrap(), manifest)
}
