//! Ingestion, orchestration and export around `compred-core`.

pub mod analysis;
pub mod bundle;
pub mod config;
pub mod error;
pub mod ingest;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod synth_out;

pub use bundle::{Bundle, Format};
pub use config::RunConfig;
pub use error::InputError;
pub use pipeline::{run_pipeline, PipelineError};
