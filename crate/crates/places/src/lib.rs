//! Places layer extraction.
//!
//! An occupancy snapshot is convolved with the robot's bounding box and
//! squashed along z into a 2D traversability field. The traversable cells
//! are tessellated greedily into the largest axis-aligned rectangles under a
//! side-length cap; each rectangle becomes a place node at its
//! ground-projected centroid, and rectangles sharing a traversable boundary
//! are connected.

mod debug;
mod field;
mod graph;
mod lift;
mod tessellate;
mod traversability;

pub use debug::{write_pgm, write_rects_json};
pub use field::{TravState, TraversabilityField};
pub use graph::{build_places_graph, PlaceNode, PlacesGraph};
pub use lift::{ground_fragment_covers, is_ground_fragment, lift_place, GROUND_MAX_HALF_HEIGHT, GROUND_MIN_HALF_WIDTH};
pub use tessellate::{side_labels, tessellate, PlaceRect, Side};
pub use traversability::{traversability, RobotBox};

use thiserror::Error;

/// Default cap on rectangle side length, meters.
pub const DEFAULT_MAX_SIDE_M: f64 = 2.0;

#[derive(Debug, Error, PartialEq)]
pub enum PlacesError {
    #[error("robot box {box_m:?} has a side smaller than one cell ({resolution} m)")]
    BoxTooSmall { box_m: [f64; 3], resolution: f64 },
    #[error("max side {max_side_m} m is below the grid resolution {resolution} m")]
    MaxSideTooSmall { max_side_m: f64, resolution: f64 },
    #[error("field shape mismatch: {0}")]
    Shape(String),
}
