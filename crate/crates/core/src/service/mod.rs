//! Configuration, the shared ingestion pipeline, dataset replay,
//! persistence and the HTTP endpoints.

mod config;
mod http;
mod pipeline;

pub use config::{load_config, Config, ConfigError};
pub use http::{error_body, router, serve, SharedPipeline};
pub use pipeline::{write_atomic, Accepted, FiringRecord, Pipeline, PipelineError, ReplaySummary};
