//! Generates the synthetic 36-month scenario, replays it and prints one
//! bulletin line per month.
//!
//! cargo run --example drought_scenario [-- <output dir>]

use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use semdrought::scenario::{write_scenario, ScenarioSpec};
use semdrought::service::{load_config, Pipeline};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = match std::env::args().nth(1) {
        Some(d) => std::path::PathBuf::from(d),
        None => std::env::temp_dir().join("semdrought-scenario"),
    };
    let spec = ScenarioSpec::default();
    let manifest = write_scenario(&dir, &spec)?;
    println!("scenario written to {}", dir.display());

    let started = Instant::now();
    let config = load_config(dir.join("config.toml"))?;
    let mut pipeline = Pipeline::new(&config)?;
    let summary = pipeline.replay(BufReader::new(File::open(dir.join("dataset.txt"))?), 0.0)?;
    println!(
        "replayed: parsed {} (expected {}), rejected {:?} (expected {:?}), firings {}",
        summary.parsed, manifest.parsed, summary.rejected, manifest.rejected, summary.firings
    );

    for period in &manifest.periods {
        let marker = if manifest.drought_periods.contains(period) { "*" } else { " " };
        match pipeline.forecast(&manifest.region, *period) {
            Ok(b) => println!("{marker} {}", b.summary),
            Err(e) => println!("{marker} {} {period}: {e}", manifest.region),
        }
    }
    println!("elapsed {:.2?}", started.elapsed());
    Ok(())
}
