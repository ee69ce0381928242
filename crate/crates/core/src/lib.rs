//! Core domain types for the 4D scene graph engine.
//!
//! This crate owns the streaming ingestion format (newline-delimited JSON
//! frame records), run-length encoded masks, occupancy snapshots, and the
//! window accumulator that chops the stream into fixed-length windows for
//! frame selection and annotation.

pub mod description;
pub mod geom;
pub mod ingest;
pub mod occupancy;
pub mod rle;
pub mod types;
pub mod window;

pub use description::{DescriptionRecord, Interval};
pub use ingest::{FrameRecord, IngestError, IngestedFrame, PoseRecord, SegmentRecord, StreamIngestor};
pub use occupancy::{CellState, OccupancyError, OccupancySnapshot};
pub use rle::{MaskError, RleMask};
pub use types::{
    FragmentTrack, FrameMeta, Pose, PoseError, SegmentObservation, Timestamp, TrackObservation,
    Window, MIN_SEGMENT_AREA,
};
pub use window::{WindowAccumulator, WindowError, DEFAULT_WINDOW_LEN};
