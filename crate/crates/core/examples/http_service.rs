//! Starts the HTTP service on an ephemeral port over the synthetic
//! scenario, posts one reading and one community report, and prints the
//! resulting bulletin.

use std::fs::File;
use std::io::BufReader;
use std::sync::Arc;

use parking_lot::RwLock;
use semdrought::scenario::{write_scenario, ScenarioSpec};
use semdrought::service::{load_config, serve, Pipeline};
use tokio::net::TcpListener;
use tokio::sync::oneshot;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("semdrought-http-example");
    write_scenario(&dir, &ScenarioSpec::default())?;
    let config = load_config(dir.join("config.toml"))?;
    let mut pipeline = Pipeline::new(&config)?;
    let summary = pipeline.replay(BufReader::new(File::open(dir.join("dataset.txt"))?), 0.0)?;
    println!("replayed {} records", summary.parsed);

    let listener = TcpListener::bind("127.0.0.1:0").await?;
    let base = format!("http://{}", listener.local_addr()?);
    let (stop, stopped) = oneshot::channel::<()>();
    let server = tokio::spawn(serve(Arc::new(RwLock::new(pipeline)), listener, async {
        let _ = stopped.await;
    }));

    // The blocking client runs off the async workers.
    let report = tokio::task::spawn_blocking(move || -> Result<(), reqwest::Error> {
        let http = reqwest::blocking::Client::new();
        println!("health: {}", http.get(format!("{base}/health")).send()?.text()?);
        let obs = r#"{"sensor_id": "gauge-01", "property": "rain", "value": 0.1, "unit": "mm", "timestamp": "2023-01-01T06:00:00Z"}"#;
        println!("observation: {}", http.post(format!("{base}/observations")).body(obs).send()?.text()?);
        let ik =
            r#"{"indicator_id": "peulwane_birds_calling", "timestamp": "2023-01-01T12:00:00Z", "region": "free_state", "confidence": 0.9}"#;
        println!("ik: {}", http.post(format!("{base}/ik")).body(ik).send()?.text()?);
        let bad = r#"{"sensor_id": "gauge-01", "property": "hail", "value": 1, "unit": "mm", "timestamp": "2023-01-01T07:00:00Z"}"#;
        let resp = http.post(format!("{base}/observations")).body(bad).send()?;
        println!("bad observation: {} {}", resp.status(), resp.text()?);
        let bulletin = http.get(format!("{base}/forecast?region=free_state&period=2022-08")).send()?.text()?;
        println!("bulletin: {bulletin}");
        Ok(())
    })
    .await?;
    let _ = stop.send(());
    server.await??;
    Ok(report?)
}
