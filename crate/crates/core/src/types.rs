use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;
use crate::rle::RleMask;

/// Observations below this pixel area are kept but flagged as small.
pub const MIN_SEGMENT_AREA: u32 = 16;

/// Seconds since the start of the stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub f64);

impl Timestamp {
    pub fn secs(self) -> f64 {
        self.0
    }
}

impl PartialOrd for Timestamp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3}s", self.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PoseError {
    #[error("quaternion norm {0} is not 1")]
    NotUnit(f64),
    #[error("non-finite pose component")]
    NonFinite,
}

/// Sensor pose: position in meters and orientation as a unit quaternion
/// `[w, x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: [f64; 4],
}

impl Pose {
    pub const QUAT_TOLERANCE: f64 = 1e-9;

    pub fn new(position: Vec3, orientation: [f64; 4]) -> Result<Self, PoseError> {
        if position.iter().chain(orientation.iter()).any(|v| !v.is_finite()) {
            return Err(PoseError::NonFinite);
        }
        let n = orientation.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (n - 1.0).abs() > Self::QUAT_TOLERANCE {
            return Err(PoseError::NotUnit(n));
        }
        Ok(Self { position, orientation })
    }

    /// Planar pose rotated by `yaw` radians about +z.
    pub fn from_yaw(position: Vec3, yaw: f64) -> Self {
        let h = 0.5 * yaw;
        Self { position, orientation: [h.cos(), 0.0, 0.0, h.sin()] }
    }

    /// Heading about +z extracted from the quaternion.
    pub fn yaw(&self) -> f64 {
        let [w, x, y, z] = self.orientation;
        (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMeta {
    pub frame_id: u64,
    pub timestamp: Timestamp,
    pub pose: Pose,
    pub width: u32,
    pub height: u32,
}

/// One tracked segment in one frame, with its lifted 3D geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentObservation {
    pub track_id: u64,
    pub mask: RleMask,
    pub area_px: u32,
    /// `(u, v)` in pixels.
    pub centroid_px: [f64; 2],
    pub centroid_3d: Vec3,
    /// Axis-aligned half sizes in meters.
    pub extent_3d: Vec3,
    /// Ground-truth label; only the mock describer and test oracles read it.
    pub label_gt: Option<String>,
    /// Set when `area_px < MIN_SEGMENT_AREA`.
    pub small: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackObservation {
    pub frame_id: u64,
    pub timestamp: Timestamp,
    pub observation: SegmentObservation,
}

/// A temporally consistent track of one segment over frames. Observations
/// are time-ordered with at most one per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentTrack {
    pub track_id: u64,
    pub observations: Vec<TrackObservation>,
}

impl FragmentTrack {
    pub fn first_seen(&self) -> Timestamp {
        self.observations.first().map(|o| o.timestamp).unwrap_or_default()
    }

    pub fn last_seen(&self) -> Timestamp {
        self.observations.last().map(|o| o.timestamp).unwrap_or_default()
    }

    pub fn observation_in(&self, frame_id: u64) -> Option<&SegmentObservation> {
        self.observations
            .iter()
            .find(|o| o.frame_id == frame_id)
            .map(|o| &o.observation)
    }

    pub fn latest(&self) -> Option<&TrackObservation> {
        self.observations.last()
    }

    /// First ground-truth label carried by any observation.
    pub fn label_gt(&self) -> Option<&str> {
        self.observations.iter().find_map(|o| o.observation.label_gt.as_deref())
    }
}

/// A closed run of consecutive frames and the tracks observed in them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub window_id: u64,
    pub frames: Vec<FrameMeta>,
    pub tracks: Vec<FragmentTrack>,
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Window {
    pub fn frame(&self, frame_id: u64) -> Option<&FrameMeta> {
        self.frames.iter().find(|f| f.frame_id == frame_id)
    }

    pub fn track(&self, track_id: u64) -> Option<&FragmentTrack> {
        self.tracks.iter().find(|t| t.track_id == track_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yaw_round_trip() {
        for yaw in [-3.0, -1.0, 0.0, 0.5, 2.9] {
            let p = Pose::from_yaw([0.0; 3], yaw);
            assert!((p.yaw() - yaw).abs() < 1e-12);
            assert!(Pose::new(p.position, p.orientation).is_ok());
        }
    }

    #[test]
    fn rejects_non_unit_quaternion() {
        assert!(matches!(Pose::new([0.0; 3], [1.0, 0.1, 0.0, 0.0]), Err(PoseError::NotUnit(_))));
        assert_eq!(Pose::new([f64::NAN, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]), Err(PoseError::NonFinite));
    }
}
