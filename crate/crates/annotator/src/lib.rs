//! Semantic annotation of selected fragments.
//!
//! Selected `(frame, fragment)` pairs are grouped into batches, sent to a
//! describer backend over a newline-delimited JSON protocol, and turned into
//! [`DescriptionRecord`]s with concatenated, unit-norm features. The backend
//! is either the deterministic [`MockDescriber`] or an external process
//! speaking the same protocol.

mod annotate;
mod batch;
mod config;
mod mock;
pub mod protocol;
mod transport;
mod worker;

pub use annotate::Annotator;
pub use batch::{build_batches, AnnotationBatch, AnnotationItem};
pub use config::{DescriberConfig, Endpoint};
pub use mock::MockDescriber;
pub use transport::{serve_backend, LineDescriber};
pub use worker::{spawn_worker, AnnotationOutput, Job, OverflowPolicy, WindowQueue, WorkerStats};

pub use sg4d_core::DescriptionRecord;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("describer timed out after {0:.1}s")]
    Timeout(f64),
    #[error("describer protocol error: {0}")]
    Protocol(String),
    #[error("describer transport: {0}")]
    Io(#[from] std::io::Error),
    #[error("describer configuration: {0}")]
    Config(String),
}

impl AnnotateError {
    /// Timeouts may succeed on retry; everything else is fatal.
    pub fn is_retryable(&self) -> bool {
        matches!(self, AnnotateError::Timeout(_))
    }
}

/// Anything that answers describe requests.
pub trait DescriberBackend: Send {
    fn describe(&mut self, request: &protocol::DescribeRequest) -> Result<protocol::DescribeReply, AnnotateError>;

    /// Embeds free text the same way fragment descriptions are embedded.
    fn embed_text(&mut self, text: &str) -> Result<protocol::EmbedReply, AnnotateError>;
}
