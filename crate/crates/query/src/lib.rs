//! Agent-facing retrieval tools over scene-graph snapshots.
//!
//! The tools are plain functions over a [`SceneGraph4D`]. [`QueryService`]
//! wraps them in a `{tool, ok, data|error}` JSON envelope, embeds text
//! queries through the describer backend, and always answers from a single
//! snapshot. [`serve_tcp`] and [`serve_stdio`] speak that envelope as
//! newline-delimited JSON.
//!
//! [`SceneGraph4D`]: sg4d_scenegraph::SceneGraph4D

mod server;
mod service;
mod tools;
mod trajectory;

pub use server::{serve_connection, serve_stdio, serve_tcp};
pub use service::{QueryService, TextEmbedder, ToolReply, ToolRequest, TOOLS};
pub use tools::{
    fragments_in_radius, objects_in_region, region_information, semantic_search, RegionInfo, RetrievedFragment,
    DEFAULT_TOP_N,
};
pub use trajectory::{agent_trajectory, TrajectoryPose, TrajectoryReply};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("unknown tool {0:?}")]
    UnknownTool(String),
    #[error("bad arguments: {0}")]
    BadArgs(String),
    #[error("unknown region {0}")]
    UnknownRegion(u64),
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("no agent poses recorded")]
    NoPoses,
    #[error("query feature has {got} dimensions, graph features have {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("text queries need an embedder backend")]
    NoEmbedder,
    #[error("embedding failed: {0}")]
    Embed(String),
}
