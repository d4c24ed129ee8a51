//! Indigenous-knowledge indicators: recording reports, the weighted
//! dryness signal and the counting rules compiled from it.

use semdrought::ik::{compile_indicator_rules, IkObservation, IkRegistry};
use semdrought::model::time::{parse_utc, DAY};

const INDICATORS: &str = include_str!("data/indicators.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut registry = IkRegistry::from_json(INDICATORS)?;
    for ind in registry.indicators() {
        println!("{:<26} {:?} weight {} months {:?}", ind.id, ind.valence, ind.weight, ind.season);
    }

    let t0 = parse_utc("2022-05-03T12:00:00Z")?;
    let reports = [
        ("lehota_frogs_silent", 0, 1.0),
        ("sifennefene_worms_scarce", 6, 0.5),
        ("lehota_frogs_silent", 20, 0.9),
        ("peulwane_birds_calling", 25, 1.0),
    ];
    println!();
    for (id, day, confidence) in reports {
        let obs = IkObservation { indicator_id: id.into(), timestamp: t0 + day * DAY, region: "free_state".into(), confidence };
        match registry.record(&obs) {
            Ok(ev) => println!("{id}: {} value {:.2}", ev.kind, ev.value.unwrap_or_default()),
            Err(e) => println!("{id}: rejected ({e})"),
        }
    }

    let signal = registry.signal("free_state", t0 - DAY, t0 + 30 * DAY);
    println!("\nsignal {:+.3} from {} reports", signal.value, signal.support);

    println!();
    for rule in compile_indicator_rules(3, 90 * DAY)? {
        println!("{rule}");
    }
    Ok(())
}
