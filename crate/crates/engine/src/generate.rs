//! Synthetic frame streams with ground truth.
//!
//! Every frame renders the agent's current room: the floor first, then the
//! room's objects from far to near as projected bounding boxes, each
//! overwriting what is behind it. Every object and floor gets a new track
//! id whenever it reappears after at least one frame out of view.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sg4d_core::geom::{dist, Vec3};
use sg4d_core::{CellState, FrameRecord, OccupancySnapshot, Pose, PoseRecord, RleMask, SegmentRecord};
use thiserror::Error;

use crate::camera::Camera;
use crate::scene::SceneSpec;

pub const STREAM_FILE: &str = "stream.jsonl";
pub const OCCUPANCY_FILE: &str = "occupancy.bin";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("invalid scene: {0}")]
    Spec(String),
    #[error("object {0:?} is never visible")]
    Unobservable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("occupancy: {0}")]
    Occupancy(#[from] sg4d_core::OccupancyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Object,
    Floor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackTruth {
    pub kind: EntityKind,
    pub label: String,
    /// Object index or room index.
    pub entity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTruth {
    pub label: String,
    pub room: Option<String>,
    pub center: Vec3,
    pub frames_visible: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub frames: usize,
    pub fps: f64,
    pub occupancy_ref: String,
    pub rooms: Vec<crate::scene::RoomSpec>,
    pub objects: Vec<ObjectTruth>,
    pub tracks: BTreeMap<u64, TrackTruth>,
    /// Rooms the agent passes through, consecutive repeats collapsed.
    pub room_sequence: Vec<String>,
}

impl Manifest {
    pub fn object_labels(&self) -> Vec<&str> {
        self.objects.iter().map(|o| o.label.as_str()).collect()
    }

    /// Visits per room name implied by the room sequence.
    pub fn visits_per_room(&self) -> BTreeMap<String, usize> {
        let mut out: BTreeMap<String, usize> = self.rooms.iter().map(|r| (r.name.clone(), 0)).collect();
        for r in &self.room_sequence {
            *out.entry(r.clone()).or_default() += 1;
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub frames: Vec<FrameRecord>,
    pub occupancy: OccupancySnapshot,
    pub manifest: Manifest,
}

impl GeneratedScene {
    /// Writes the stream, occupancy snapshot and manifest into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), GenerateError> {
        std::fs::create_dir_all(dir)?;
        let mut stream = std::io::BufWriter::new(std::fs::File::create(dir.join(STREAM_FILE))?);
        for f in &self.frames {
            writeln!(stream, "{}", f.to_json_line())?;
        }
        stream.flush()?;
        self.occupancy.save(&dir.join(OCCUPANCY_FILE))?;
        let manifest = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        std::fs::write(dir.join(MANIFEST_FILE), manifest + "\n")?;
        Ok(())
    }

    pub fn stream_text(&self) -> String {
        let mut s = String::new();
        for f in &self.frames {
            s.push_str(&f.to_json_line());
            s.push('\n');
        }
        s
    }
}

fn validate(spec: &SceneSpec) -> Result<(), GenerateError> {
    let bad = |m: &str| Err(GenerateError::Spec(m.into()));
    if !(spec.fps > 0.0) || !(spec.duration_s > 0.0) || !(spec.resolution > 0.0) {
        return bad("fps, duration_s and resolution must be positive");
    }
    if spec.rooms.is_empty() {
        return bad("at least one room is required");
    }
    if spec.trajectory.is_empty() {
        return bad("the trajectory needs at least one waypoint");
    }
    if spec.trajectory.windows(2).any(|w| w[1].t < w[0].t) {
        return bad("trajectory waypoints must be time-ordered");
    }
    for r in &spec.rooms {
        if !(r.max[0] > r.min[0] && r.max[1] > r.min[1]) {
            return Err(GenerateError::Spec(format!("room {:?} is empty", r.name)));
        }
    }
    for o in &spec.objects {
        if o.half_extent.iter().any(|h| !(*h > 0.0)) {
            return Err(GenerateError::Spec(format!("object {:?} needs a positive extent", o.label)));
        }
        if o.motion.windows(2).any(|w| w[1].t < w[0].t) {
            return Err(GenerateError::Spec(format!("object {:?} motion must be time-ordered", o.label)));
        }
    }
    let c = &spec.camera;
    if c.width == 0 || c.height == 0 || !(c.fx > 0.0) || !(c.fy > 0.0) || !(c.near > 0.0) {
        return bad("camera intrinsics must be positive");
    }
    Ok(())
}

/// Static occupancy of the whole scene. Rooms are floored and walled;
/// doors open the walls; static objects are solid; everything else,
/// including space above the walls, is unknown.
pub fn occupancy(spec: &SceneSpec) -> Result<OccupancySnapshot, GenerateError> {
    let res = spec.resolution;
    let margin = 0.5;
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for r in &spec.rooms {
        for k in 0..2 {
            lo[k] = lo[k].min(r.min[k]);
            hi[k] = hi[k].max(r.max[k]);
        }
    }
    let origin = [lo[0] - margin, lo[1] - margin, -2.0 * res];
    let nx = ((hi[0] - lo[0] + 2.0 * margin) / res).round() as usize;
    let ny = ((hi[1] - lo[1] + 2.0 * margin) / res).round() as usize;
    let nz = ((spec.wall_height + 4.0 * res) / res).round() as usize;
    let mut occ = OccupancySnapshot::filled(origin, res, [nx, ny, nz], CellState::Unknown)?;
    let statics: Vec<_> = spec.objects.iter().filter(|o| o.motion.is_empty()).collect();
    for y in 0..ny {
        for x in 0..nx {
            let cx = origin[0] + (x as f64 + 0.5) * res;
            let cy = origin[1] + (y as f64 + 0.5) * res;
            let Some(room) = spec.rooms.iter().find(|r| r.contains([cx, cy])) else { continue };
            let near_edge = cx - room.min[0] < res
                || room.max[0] - cx < res
                || cy - room.min[1] < res
                || room.max[1] - cy < res;
            let in_door = spec
                .doors
                .iter()
                .any(|d| (cy - d.center[1]).abs() <= d.width * 0.5 && (cx - d.center[0]).abs() <= res);
            let wall = near_edge && !in_door;
            for z in 0..nz {
                let cz = origin[2] + (z as f64 + 0.5) * res;
                let state = if cz < 0.0 {
                    CellState::Occupied
                } else if cz >= spec.wall_height {
                    CellState::Unknown
                } else if wall
                    || statics.iter().any(|o| (0..3).all(|k| ([cx, cy, cz][k] - o.center[k]).abs() <= o.half_extent[k]))
                {
                    CellState::Occupied
                } else {
                    CellState::Free
                };
                occ.set(x, y, z, state);
            }
        }
    }
    Ok(occ)
}

/// Paints `[u0, u1)` with `id` over the row's existing intervals.
fn paint(row: &mut Vec<(u32, u32, usize)>, u0: u32, u1: u32, id: usize) {
    let mut out = Vec::with_capacity(row.len() + 2);
    for &(a, b, e) in row.iter() {
        if b <= u0 || a >= u1 {
            out.push((a, b, e));
            continue;
        }
        if a < u0 {
            out.push((a, u0, e));
        }
        if b > u1 {
            out.push((u1, b, e));
        }
    }
    out.push((u0, u1, id));
    out.sort_unstable();
    *row = out;
}

pub fn generate(spec: &SceneSpec) -> Result<GeneratedScene, GenerateError> {
    validate(spec)?;
    let occupancy = occupancy(spec)?;
    let n_obj = spec.objects.len();
    let (w, h) = (spec.camera.width, spec.camera.height);
    let mut frames = Vec::with_capacity(spec.frame_count());
    let mut tracks: BTreeMap<u64, TrackTruth> = BTreeMap::new();
    // per entity: (current track id, last frame index seen)
    let mut live: Vec<Option<(u64, usize)>> = vec![None; n_obj + spec.rooms.len()];
    let mut next_track = 0u64;
    let mut visible_frames = vec![0usize; n_obj];
    let mut room_sequence: Vec<String> = Vec::new();

    for k in 0..spec.frame_count() {
        let t = k as f64 / spec.fps;
        let (xy, yaw) = spec.agent_at(t);
        let cam = Camera::new(spec.camera, xy, yaw);
        let pose = Pose::from_yaw(cam.center, yaw);
        let room = spec.room_index(xy);
        if let Some(r) = room {
            if room_sequence.last() != Some(&spec.rooms[r].name) {
                room_sequence.push(spec.rooms[r].name.clone());
            }
        }

        let mut rows: Vec<Vec<(u32, u32, usize)>> = vec![Vec::new(); h as usize];
        let mut geometry: BTreeMap<usize, (Vec3, Vec3, String)> = BTreeMap::new();
        if let Some(r) = room {
            let rm = &spec.rooms[r];
            let floor = n_obj + r;
            for v in 0..h {
                if let Some((u0, u1)) = cam.floor_span(v, rm.min, rm.max) {
                    paint(&mut rows[v as usize], u0, u1, floor);
                }
            }
            let c = rm.center();
            let half = [(rm.max[0] - rm.min[0]) * 0.5, (rm.max[1] - rm.min[1]) * 0.5, 0.0];
            geometry.insert(floor, ([c[0], c[1], 0.0], half, rm.floor_label.clone()));

            let mut drawn: Vec<(f64, usize, [u32; 4])> = Vec::new();
            for (i, o) in spec.objects.iter().enumerate() {
                let center = o.center_at(t);
                if spec.room_index([center[0], center[1]]) != Some(r) {
                    continue;
                }
                let d = dist(center, cam.center);
                if d > spec.camera.max_range {
                    continue;
                }
                if let Some(rect) = cam.box_rect(center, o.half_extent) {
                    drawn.push((d, i, rect));
                    geometry.insert(i, (center, o.half_extent, o.label.clone()));
                }
            }
            drawn.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            for (_, i, [u0, v0, u1, v1]) in drawn {
                for v in v0..v1 {
                    paint(&mut rows[v as usize], u0, u1, i);
                }
            }
        }

        let mut spans: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        let mut sums: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        for (v, row) in rows.iter().enumerate() {
            for &(a, b, e) in row {
                let len = (b - a) as usize;
                spans.entry(e).or_default().push((v * w as usize + a as usize, len));
                let s = sums.entry(e).or_default();
                s.0 += len as f64 * ((a + b) as f64 * 0.5);
                s.1 += len as f64 * (v as f64 + 0.5);
            }
        }

        let mut segments = Vec::new();
        for (e, sp) in spans {
            let mask = RleMask::from_spans(w, h, &sp).expect("row-ordered spans are valid");
            let area = mask.count_set();
            let (su, sv) = sums[&e];
            let track_id = match live[e] {
                Some((id, last)) if last + 1 == k => id,
                _ => {
                    let id = next_track;
                    next_track += 1;
                    let (kind, label, entity) = if e < n_obj {
                        (EntityKind::Object, spec.objects[e].label.clone(), e)
                    } else {
                        (EntityKind::Floor, spec.rooms[e - n_obj].floor_label.clone(), e - n_obj)
                    };
                    tracks.insert(id, TrackTruth { kind, label, entity });
                    id
                }
            };
            live[e] = Some((track_id, k));
            if e < n_obj {
                visible_frames[e] += 1;
            }
            let (c3d, ext, label) = geometry[&e].clone();
            segments.push(SegmentRecord {
                track_id,
                rle: mask.to_string(),
                area: area as u32,
                cu: su / area as f64,
                cv: sv / area as f64,
                c3d,
                ext,
                label_gt: Some(label),
            });
        }
        segments.sort_by_key(|s| s.track_id);
        frames.push(FrameRecord {
            frame_id: k as u64,
            t,
            pose: PoseRecord { p: pose.position, q: pose.orientation },
            w,
            h,
            segments,
            occupancy_ref: (k == 0).then(|| OCCUPANCY_FILE.to_string()),
        });
    }

    if let Some(i) = visible_frames.iter().position(|&n| n == 0) {
        return Err(GenerateError::Unobservable(spec.objects[i].label.clone()));
    }
    let objects = spec
        .objects
        .iter()
        .zip(&visible_frames)
        .map(|(o, &n)| ObjectTruth {
            label: o.label.clone(),
            room: spec.room_index([o.center[0], o.center[1]]).map(|r| spec.rooms[r].name.clone()),
            center: o.center,
            frames_visible: n,
        })
        .collect();
    let manifest = Manifest {
        frames: frames.len(),
        fps: spec.fps,
        occupancy_ref: OCCUPANCY_FILE.into(),
        rooms: spec.rooms.clone(),
        objects,
        tracks,
        room_sequence,
    };
    Ok(GeneratedScene { frames, occupancy, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn painting_overwrites_and_splits() {
        let mut row = vec![(0, 10, 0)];
        paint(&mut row, 3, 5, 1);
        assert_eq!(row, vec![(0, 3, 0), (3, 5, 1), (5, 10, 0)]);
        paint(&mut row, 0, 4, 2);
        assert_eq!(row, vec![(0, 4, 2), (4, 5, 1), (5, 10, 0)]);
        paint(&mut row, 12, 14, 3);
        assert_eq!(row.last(), Some(&(12, 14, 3)));
    }
}
