//! Synthetic scene description.

use serde::{Deserialize, Serialize};
use sg4d_core::geom::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    pub name: String,
    pub floor_label: String,
    /// Floor rectangle corners in xy, meters.
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl RoomSpec {
    pub fn contains(&self, xy: [f64; 2]) -> bool {
        xy[0] >= self.min[0] && xy[0] <= self.max[0] && xy[1] >= self.min[1] && xy[1] <= self.max[1]
    }

    pub fn center(&self) -> [f64; 2] {
        [(self.min[0] + self.max[0]) * 0.5, (self.min[1] + self.max[1]) * 0.5]
    }
}

/// Opening in a wall running along y, centered at `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoorSpec {
    pub center: [f64; 2],
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub t: f64,
    pub center: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub label: String,
    pub center: Vec3,
    pub half_extent: Vec3,
    /// Scripted motion, interpolated linearly and held at the ends. Moving
    /// objects are left out of the occupancy map.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub motion: Vec<Keyframe>,
}

impl ObjectSpec {
    pub fn center_at(&self, t: f64) -> Vec3 {
        if self.motion.is_empty() {
            return self.center;
        }
        let k = &self.motion;
        if t <= k[0].t {
            return k[0].center;
        }
        for w in k.windows(2) {
            if t <= w[1].t {
                let f = if w[1].t > w[0].t { (t - w[0].t) / (w[1].t - w[0].t) } else { 1.0 };
                return sg4d_core::geom::lerp(w[0].center, w[1].center, f);
            }
        }
        k[k.len() - 1].center
    }
}

/// Agent waypoint; position and yaw are interpolated linearly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub t: f64,
    pub position: [f64; 2],
    /// Radians; not wrapped, so a full turn is `2π` more than the last.
    pub yaw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraSpec {
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    /// Mounting height above the floor.
    pub height_m: f64,
    /// Tilt about the camera's right axis; negative looks down.
    pub pitch: f64,
    pub near: f64,
    pub max_range: f64,
}

impl Default for CameraSpec {
    fn default() -> Self {
        Self { width: 640, height: 480, fx: 400.0, fy: 400.0, height_m: 1.2, pitch: -0.3, near: 0.1, max_range: 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub fps: f64,
    pub duration_s: f64,
    pub resolution: f64,
    pub wall_height: f64,
    pub rooms: Vec<RoomSpec>,
    #[serde(default)]
    pub doors: Vec<DoorSpec>,
    pub objects: Vec<ObjectSpec>,
    pub trajectory: Vec<Waypoint>,
    #[serde(default)]
    pub camera: CameraSpec,
}

impl SceneSpec {
    /// Pose at time `t`: xy and yaw.
    pub fn agent_at(&self, t: f64) -> ([f64; 2], f64) {
        let w = &self.trajectory;
        if t <= w[0].t {
            return (w[0].position, w[0].yaw);
        }
        for p in w.windows(2) {
            if t <= p[1].t {
                let f = if p[1].t > p[0].t { (t - p[0].t) / (p[1].t - p[0].t) } else { 1.0 };
                let xy = [
                    p[0].position[0] + f * (p[1].position[0] - p[0].position[0]),
                    p[0].position[1] + f * (p[1].position[1] - p[0].position[1]),
                ];
                return (xy, p[0].yaw + f * (p[1].yaw - p[0].yaw));
            }
        }
        let last = w[w.len() - 1];
        (last.position, last.yaw)
    }

    pub fn room_index(&self, xy: [f64; 2]) -> Option<usize> {
        self.rooms.iter().position(|r| r.contains(xy))
    }

    pub fn frame_count(&self) -> usize {
        (self.duration_s * self.fps + 1e-9).floor() as usize
    }

    /// Two rooms side by side joined by a door, five labeled objects in
    /// each, and a walk from the first room into the second and back with a
    /// full turn in each room.
    pub fn two_rooms() -> Self {
        use std::f64::consts::PI;
        let obj = |label: &str, center: Vec3, half_extent: Vec3| ObjectSpec {
            label: label.into(),
            center,
            half_extent,
            motion: Vec::new(),
        };
        let wp = |t: f64, x: f64, y: f64, yaw: f64| Waypoint { t, position: [x, y], yaw };
        Self {
            fps: 10.0,
            duration_s: 60.0,
            resolution: 0.1,
            wall_height: 2.0,
            rooms: vec![
                RoomSpec { name: "A".into(), floor_label: "wooden floor".into(), min: [0.0, 0.0], max: [8.0, 6.0] },
                RoomSpec { name: "B".into(), floor_label: "tiled floor".into(), min: [8.0, 0.0], max: [16.0, 6.0] },
            ],
            doors: vec![DoorSpec { center: [8.0, 3.0], width: 1.2 }],
            objects: vec![
                obj("red armchair", [1.0, 1.0, 0.4], [0.4, 0.4, 0.4]),
                obj("oak bookshelf", [4.0, 5.6, 0.9], [0.6, 0.2, 0.9]),
                obj("floor lamp", [7.0, 5.2, 0.8], [0.15, 0.15, 0.8]),
                obj("potted plant", [6.8, 0.8, 0.5], [0.25, 0.25, 0.5]),
                obj("coffee table", [2.5, 4.5, 0.25], [0.5, 0.3, 0.25]),
                obj("kitchen sink", [15.5, 1.0, 0.45], [0.4, 0.3, 0.45]),
                obj("white refrigerator", [15.4, 5.2, 0.9], [0.4, 0.4, 0.9]),
                obj("microwave oven", [12.0, 5.7, 1.0], [0.25, 0.2, 0.15]),
                obj("dining chair", [10.0, 1.5, 0.45], [0.25, 0.25, 0.45]),
                obj("trash can", [9.0, 5.3, 0.35], [0.2, 0.2, 0.35]),
            ],
            trajectory: vec![
                wp(0.0, 1.0, 3.0, 0.0),
                wp(6.0, 4.0, 3.0, 0.0),
                wp(14.0, 4.0, 3.0, 2.0 * PI),
                wp(20.0, 8.0, 3.0, 2.0 * PI),
                wp(24.0, 12.0, 3.0, 2.0 * PI),
                wp(32.0, 12.0, 3.0, 4.0 * PI),
                wp(33.0, 12.0, 3.0, 5.0 * PI),
                wp(37.0, 8.0, 3.0, 5.0 * PI),
                wp(41.0, 4.0, 3.0, 5.0 * PI),
                wp(49.0, 4.0, 3.0, 7.0 * PI),
                wp(51.0, 2.0, 3.0, 7.0 * PI),
                wp(60.0, 2.0, 3.0, 7.0 * PI),
            ],
            camera: CameraSpec::default(),
        }
    }
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self::two_rooms()
    }
}
