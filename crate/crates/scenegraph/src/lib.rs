//! The 4D scene graph.
//!
//! Object nodes accumulate one centroid and one description per window;
//! reconciliation merges re-observed objects (and duplicate places across
//! occupancy snapshots) while keeping every description in a time-ordered
//! history. Places are grouped into regions over the places graph, each
//! region summarized from a farthest-point sample of its objects, and the
//! agent's pose stream is folded into per-region visits.

mod graph;
mod object;
mod persist;
mod reconcile;
mod regions;
mod snapshot;
mod summarize;
mod visits;

pub use graph::{AgentPose, SceneGraph4D};
pub use object::ObjectNode;
pub use persist::{GraphFile, FORMAT_NAME, FORMAT_VERSION};
pub use reconcile::{reconcile, MergeReport, ReconcileParams};
pub use regions::{cluster_regions, Region, RegionParams, Visit, VisitPoint};
pub use snapshot::GraphHandle;
pub use summarize::{farthest_point_sampling, summarize_regions, Summarizer, MAX_EXEMPLARS};
pub use visits::compute_region_visits;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SceneGraphError {
    #[error("agent pose at {t} s precedes the last recorded pose at {last} s")]
    PoseOrder { t: f64, last: f64 },
    #[error("track {0} has no observations")]
    EmptyTrack(u64),
    #[error("graph file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
