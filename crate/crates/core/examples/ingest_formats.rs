//! One reading delivered as CSV, JSON and XML ends up as the same
//! canonical observation and the same eight triples.

use semdrought::ingest::{canonicalize, parse_csv_line, parse_json_observation, parse_xml_observation, AlignmentTable, CsvSchema};
use semdrought::model::{observation_to_triples, Namespace, Vocabulary};

const ALIGNMENT: &str = include_str!("data/alignment.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ns = Namespace::default();
    let table = AlignmentTable::from_json(ALIGNMENT, Vocabulary::standard(ns.clone()))?;

    let csv = "thermo-03,air_temp,88.7,degF,2022-06-01T06:00:00Z,-29.1,26.19";
    let json = r#"{"sensor_id": "thermo-03", "property": "temp", "value": 88.7, "unit": "degF", "timestamp": "2022-06-01T06:00:00Z"}"#;
    let xml = r#"<Observation>
        <procedure>thermo-03</procedure>
        <observedProperty>air_temp</observedProperty>
        <result uom="degF">88.7</result>
        <time>2022-06-01T06:00:00Z</time>
    </Observation>"#;

    let raws = [parse_csv_line(csv, &CsvSchema::default())?, parse_json_observation(json)?, parse_xml_observation(xml)?];
    let mut rendered = Vec::new();
    for raw in &raws {
        let obs = canonicalize(raw, &table)?;
        println!("{:?}: {} = {:.3} {}", raw.source_format, ns.compact(&obs.property), obs.value, ns.compact(&obs.unit));
        let mut lines: Vec<String> = observation_to_triples(&ns, &obs)?.iter().map(ToString::to_string).collect();
        lines.sort();
        rendered.push(lines);
    }
    assert!(rendered.windows(2).all(|w| w[0] == w[1]));
    println!("\nall formats agree:");
    for line in &rendered[0] {
        println!("  {line}");
    }

    match parse_csv_line("thermo-03,soil_temp,12,degC,2022-06-01T06:00:00Z,,", &CsvSchema::default())
        .map_err(Box::<dyn std::error::Error>::from)
        .and_then(|raw| canonicalize(&raw, &table).map_err(Into::into))
    {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("\nrejected: {e}"),
    }
    Ok(())
}
