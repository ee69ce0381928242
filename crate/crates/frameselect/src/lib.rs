//! Annotation frame selection.
//!
//! For one window we first find the smallest number of frames `k*` that sees
//! every fragment (greedy set cover), then choose exactly `k* + epsilon`
//! frames and assign every fragment to one selected frame where it is
//! visible, maximizing the summed view quality. The second stage is solved
//! exactly by branch and bound.

mod assign;
mod cover;
mod instance;
mod matrix;
mod score;

pub use assign::{solve_assignment, solve_assignment_limited, SelectionResult};
pub use cover::{greedy_set_cover, CoverResult};
pub use instance::SelectionInstance;
pub use matrix::{QualityMatrix, VisibilityMatrix};
pub use score::{binary_entropy, position_score, quality, size_score};

use sg4d_core::Window;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SelectError {
    #[error("centroid ({u}, {v}) outside frame {width}x{height}")]
    OutOfFrame { u: f64, v: f64, width: f64, height: f64 },
    #[error("fragment {0} is not visible in any frame")]
    Uncoverable(u64),
    #[error("no assignment of all fragments fits within {0} frames")]
    Infeasible(usize),
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error("quality {value} at ({frame}, {fragment}) is invalid: {reason}")]
    BadQuality { frame: usize, fragment: usize, value: f64, reason: &'static str },
    #[error("window has no frames")]
    EmptyWindow,
}

/// Tunables for the selection stage.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SelectParams {
    /// Weight of the position score against the size score.
    pub alpha: f64,
    /// Areas at or below this many pixels score zero for size.
    pub a_min: f64,
    /// Saturation scale of the size score, in pixels.
    pub a_sat: f64,
    /// Extra frames allowed beyond the minimum cover.
    pub epsilon: usize,
    /// Search nodes the exact stage may expand per budget before returning
    /// its best set so far.
    pub max_nodes: u64,
}

/// Default node limit, roughly a second of search.
pub const DEFAULT_MAX_NODES: u64 = 100_000;

impl Default for SelectParams {
    fn default() -> Self {
        Self { alpha: 0.5, a_min: 400.0, a_sat: 4000.0, epsilon: 1, max_nodes: DEFAULT_MAX_NODES }
    }
}

/// Runs both stages on a window.
pub fn select_frames(window: &Window, params: &SelectParams) -> Result<SelectionResult, SelectError> {
    if window.frames.is_empty() {
        return Err(SelectError::EmptyWindow);
    }
    let vis = VisibilityMatrix::from_window(window);
    let quality = QualityMatrix::from_window(window, &vis, params)?;
    let cover = greedy_set_cover(&vis)?;
    solve_assignment_limited(&vis, &quality, cover.k_star, params.epsilon, params.max_nodes)
}
