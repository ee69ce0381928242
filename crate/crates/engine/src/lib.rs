//! Synthetic scenes, the end-to-end pipeline and its benchmarks.

pub mod bench;
pub mod camera;
pub mod config;
pub mod generate;
pub mod pipeline;
pub mod scene;
pub mod stats;

pub use bench::{bench, BenchReport};
pub use config::{PlacesConfig, QueueConfig, RunConfig};
pub use generate::{generate, GenerateError, GeneratedScene, Manifest};
pub use pipeline::{run_config_input, run_pipeline, run_stream, write_outputs, RunOutput};
pub use scene::SceneSpec;
pub use stats::{RunStats, WindowStats};

use std::path::PathBuf;

use thiserror::Error;

/// Pipeline failures, each attributed to the module that raised it.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("no frames")]
    NoFrames,
    #[error("config: {0}")]
    Config(String),
    #[error("ingest: {0}")]
    Ingest(#[from] sg4d_core::IngestError),
    #[error("frameselect: window {window}: {source}")]
    Select { window: u64, source: sg4d_frameselect::SelectError },
    #[error("annotator: {0}")]
    Annotate(String),
    #[error("places: {0}")]
    Places(#[from] sg4d_places::PlacesError),
    #[error("occupancy: {0}")]
    Occupancy(String),
    #[error("scenegraph: {0}")]
    Graph(#[from] sg4d_scenegraph::SceneGraphError),
    #[error("generate: {0}")]
    Generate(#[from] GenerateError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}
