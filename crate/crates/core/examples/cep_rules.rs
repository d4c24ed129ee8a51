//! Parses a rule set and feeds a short event stream through the engine.

use semdrought::cep::{parse_ruleset, Engine, Event};
use semdrought::model::time::{format_utc, parse_utc, DAY};
use semdrought::model::Namespace;

const RULES: &str = "
# hot afternoons
RULE hot_day WHEN ex:airTemperature > 30 WITHIN 1d EMIT HotDay SEVERITY 0.3
RULE heat_wave WHEN COUNT(HotDay) >= 3 WITHIN 4d STEP 1d EMIT HeatWave SEVERITY 0.7
RULE drying WHEN SLOPE(ex:soilMoisture) < -0.5 WITHIN 5d STEP 1d EMIT SoilDrying
RULE quiet_gauge WHEN ABSENT(ex:precipitation) WITHIN 2d EMIT GaugeSilent SEVERITY 0.1
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ns = Namespace::default();
    let rules = parse_ruleset(RULES)?;
    for r in &rules {
        println!("{r}");
    }
    let mut engine = Engine::with_namespace(rules, &ns)?;

    let start = parse_utc("2022-01-01T00:00:00Z")?;
    let temp = ns.ex("airTemperature");
    let soil = ns.ex("soilMoisture");
    let mut firings = Vec::new();
    for day in 0..8 {
        let t = start + day * DAY + 14 * 3600;
        firings.extend(engine.push_event(Event::new(temp.as_str(), t, Some(29.0 + day as f64)))?);
        firings.extend(engine.push_event(Event::new(soil.as_str(), t, Some(30.0 - 1.2 * day as f64)))?);
    }
    firings.extend(engine.advance_to(start + 9 * DAY)?);

    println!();
    for f in &firings {
        println!("{} {:<12} -> {} (evidence {:?})", format_utc(f.window_end)?, f.rule, f.event.kind, f.evidence);
    }

    let late = engine.push_event(Event::new(temp.as_str(), start, Some(20.0)));
    println!("\nlate event: {}", late.unwrap_err());
    Ok(())
}
