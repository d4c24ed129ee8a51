use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use parking_lot::RwLock;
use semdrought::cep::parse_ruleset;
use semdrought::forecast::Period;
use semdrought::service::{error_body, load_config, serve, write_atomic, Config, Pipeline, PipelineError};

#[derive(Parser)]
#[command(name = "semdrought", version, about = "Semantic sensor middleware for drought early warning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
        /// Dataset to replay before accepting requests.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Replay a `format|payload` dataset and print the run summary.
    Replay {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Time compression; 0 replays as fast as possible.
        #[arg(long, default_value_t = 0.0)]
        speed: f64,
    },
    /// Print the bulletin JSON for a region and month.
    Forecast {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        region: String,
        #[arg(long)]
        period: String,
    },
    /// Parse a rule file; errors go to standard error.
    ValidateRules {
        #[arg(long)]
        file: PathBuf,
    },
    /// Write the triple store as N-Triples.
    Export {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::Runtime(error_body(&e).to_string())
    }
}

/// Prints to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn config(path: &PathBuf) -> Result<Config, Failure> {
    load_config(path).map_err(|e| Failure::Usage(e.to_string()))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Serve { config: path, replay } => {
            let cfg = config(&path)?;
            let mut pipeline = Pipeline::open(&cfg)?;
            if let Some(input) = replay {
                let file = File::open(&input).map_err(|e| Failure::Usage(format!("{}: {e}", input.display())))?;
                let summary = pipeline.replay(BufReader::new(file), 0.0)?;
                log::info!("replayed {} records, {} firings", summary.parsed, summary.firings);
            }
            let state = Arc::new(RwLock::new(pipeline));
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Runtime(e.to_string()))?;
            runtime.block_on(async {
                let listener =
                    tokio::net::TcpListener::bind(&cfg.bind).await.map_err(|e| Failure::Runtime(format!("bind {}: {e}", cfg.bind)))?;
                log::info!("listening on {}", cfg.bind);
                let shutdown = async {
                    let _ = tokio::signal::ctrl_c().await;
                };
                serve(state, listener, shutdown).await.map_err(|e| Failure::Runtime(e.to_string()))
            })
        }
        Command::Replay { config: path, input, speed } => {
            if !(speed >= 0.0 && speed.is_finite()) {
                return Err(Failure::Usage("--speed must be a non-negative number".into()));
            }
            let cfg = config(&path)?;
            let file = File::open(&input).map_err(|e| Failure::Usage(format!("{}: {e}", input.display())))?;
            let mut pipeline = Pipeline::open(&cfg)?;
            let summary = pipeline.replay(BufReader::new(file), speed)?;
            emit(&serde_json::to_string_pretty(&summary).expect("summary serializes"));
            Ok(())
        }
        Command::Forecast { config: path, region, period } => {
            let cfg = config(&path)?;
            let period: Period = period.parse().map_err(|e: semdrought::forecast::ForecastError| Failure::Usage(e.to_string()))?;
            let pipeline = Pipeline::open(&cfg)?;
            let bulletin = pipeline.forecast(&region, period)?;
            emit(&serde_json::to_string_pretty(&bulletin).expect("bulletin serializes"));
            Ok(())
        }
        Command::ValidateRules { file } => {
            let text = fs::read_to_string(&file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
            let rules = parse_ruleset(&text).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
            emit(&format!("{} rules ok", rules.len()));
            Ok(())
        }
        Command::Export { config: path, out } => {
            let cfg = config(&path)?;
            let pipeline = Pipeline::open(&cfg)?;
            write_atomic(&out, pipeline.store().serialize().as_bytes()).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
            eprintln!("wrote {} triples to {}", pipeline.store().len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
