//! Basic graph pattern queries, forward-chaining saturation and an
//! N-Triples round trip over a small sensor graph.

use semdrought::model::{Namespace, Term, Triple, Vocabulary};
use semdrought::store::{builtin_rules, InferenceRule, TriplePattern, TripleStore};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ns = Namespace::default();
    let mut store = TripleStore::new();
    store.extend(Vocabulary::standard(ns.clone()).to_triples());

    let iri = |s: &str| ns.expand(s).map(Term::Iri);
    let typ = ns.rdf("type");
    store.insert(Triple::new(iri("ex:sensor/gauge-01")?, typ.clone(), iri("ex:RainGauge")?)?);
    store.insert(Triple::new(iri("ex:RainGauge")?, ns.rdfs("subClassOf"), iri("ex:Sensor")?)?);
    store.insert(Triple::new(iri("ex:sensor/gauge-01")?, ns.ex("locatedIn"), iri("ex:region/free_state")?)?);

    let mut rules = builtin_rules(&ns);
    rules.push(InferenceRule::parse("?s rdf:type ex:Sensor . ?s ex:locatedIn ?r => ?r ex:monitoredBy ?s", &ns)?);
    let before = store.len();
    let derived = store.saturate(&rules);
    println!("{before} asserted triples, {derived} derived");

    let query = [TriplePattern::parse("?s rdf:type ex:Object", &ns)?, TriplePattern::parse("?r ex:monitoredBy ?s", &ns)?];
    for b in store.query_bgp(&query) {
        println!("{} monitors {}", ns.compact(b["s"].as_iri().unwrap()), ns.compact(b["r"].as_iri().unwrap()));
    }

    let text = store.serialize();
    let reloaded = TripleStore::load(&text)?;
    assert_eq!(reloaded.triple_set(), store.triple_set());
    println!("round trip: {} lines, set-equal", text.lines().count());
    Ok(())
}
