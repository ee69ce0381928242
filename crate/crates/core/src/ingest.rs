//! Newline-delimited JSON frame stream.
//!
//! One frame per line:
//!
//! ```json
//! {"frame_id":7,"t":0.7,"pose":{"p":[x,y,z],"q":[w,x,y,z]},"w":640,"h":480,
//!  "segments":[{"track_id":3,"rle":"...","area":812,"cu":320.5,"cv":240.5,
//!               "c3d":[x,y,z],"ext":[hx,hy,hz],"label_gt":"wooden chair"}],
//!  "occupancy_ref":"occ_000.bin"}
//! ```

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;
use crate::rle::RleMask;
use crate::types::{FrameMeta, Pose, SegmentObservation, Timestamp, MIN_SEGMENT_AREA};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed record: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: invalid record: {reason}")]
    Invalid { line: usize, reason: String },
    #[error("line {line}: duplicate frame_id {frame_id}")]
    DuplicateFrame { line: usize, frame_id: u64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub p: Vec3,
    pub q: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub track_id: u64,
    pub rle: String,
    pub area: u32,
    pub cu: f64,
    pub cv: f64,
    pub c3d: Vec3,
    pub ext: Vec3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_gt: Option<String>,
}

/// Wire form of one line of the frame stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_id: u64,
    pub t: f64,
    pub pose: PoseRecord,
    pub w: u32,
    pub h: u32,
    #[serde(default)]
    pub segments: Vec<SegmentRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupancy_ref: Option<String>,
}

impl FrameRecord {
    pub fn from_parts(meta: &FrameMeta, segments: &[SegmentObservation], occupancy_ref: Option<String>) -> Self {
        Self {
            frame_id: meta.frame_id,
            t: meta.timestamp.0,
            pose: PoseRecord { p: meta.pose.position, q: meta.pose.orientation },
            w: meta.width,
            h: meta.height,
            segments: segments
                .iter()
                .map(|s| SegmentRecord {
                    track_id: s.track_id,
                    rle: s.mask.to_string(),
                    area: s.area_px,
                    cu: s.centroid_px[0],
                    cv: s.centroid_px[1],
                    c3d: s.centroid_3d,
                    ext: s.extent_3d,
                    label_gt: s.label_gt.clone(),
                })
                .collect(),
            occupancy_ref,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("frame record serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestedFrame {
    pub meta: FrameMeta,
    pub segments: Vec<SegmentObservation>,
    pub occupancy_ref: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackStats {
    pub observations: usize,
    pub first_seen: Timestamp,
    pub last_seen: Timestamp,
}

/// Parses and validates frame records, keeping a registry of every track
/// seen so far. Single writer.
#[derive(Debug, Default)]
pub struct StreamIngestor {
    line: usize,
    seen_frames: HashSet<u64>,
    last_t: Option<f64>,
    tracks: BTreeMap<u64, TrackStats>,
}

impl StreamIngestor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn frames_ingested(&self) -> usize {
        self.seen_frames.len()
    }

    pub fn track_count(&self) -> usize {
        self.tracks.len()
    }

    pub fn tracks(&self) -> &BTreeMap<u64, TrackStats> {
        &self.tracks
    }

    /// Ingests the next line of the stream. Blank lines are skipped and
    /// yield `Ok(None)`; they still count toward line numbers.
    pub fn ingest_line(&mut self, line: &str) -> Result<Option<IngestedFrame>, IngestError> {
        self.line += 1;
        if line.trim().is_empty() {
            return Ok(None);
        }
        let record: FrameRecord =
            serde_json::from_str(line).map_err(|source| IngestError::Parse { line: self.line, source })?;
        self.ingest_record(record).map(Some)
    }

    pub fn ingest_record(&mut self, record: FrameRecord) -> Result<IngestedFrame, IngestError> {
        let line = self.line;
        let invalid = |reason: String| IngestError::Invalid { line, reason };

        if self.seen_frames.contains(&record.frame_id) {
            return Err(IngestError::DuplicateFrame { line, frame_id: record.frame_id });
        }
        if record.w == 0 || record.h == 0 {
            return Err(invalid(format!("frame size {}x{} must be positive", record.w, record.h)));
        }
        if !(record.t.is_finite() && record.t >= 0.0) {
            return Err(invalid(format!("timestamp {} must be a non-negative number", record.t)));
        }
        if let Some(prev) = self.last_t {
            if record.t < prev {
                return Err(invalid(format!("timestamp {} precedes previous {}", record.t, prev)));
            }
        }
        let pose = Pose::new(record.pose.p, record.pose.q).map_err(|e| invalid(e.to_string()))?;

        let mut segments = Vec::with_capacity(record.segments.len());
        let mut frame_tracks = HashSet::new();
        for s in record.segments {
            if !frame_tracks.insert(s.track_id) {
                return Err(invalid(format!("track {} appears twice in frame", s.track_id)));
            }
            let mask = RleMask::parse(&s.rle, record.w, record.h)
                .map_err(|e| invalid(format!("track {}: {e}", s.track_id)))?;
            let set = mask.count_set();
            if s.area == 0 || set != s.area as u64 {
                return Err(invalid(format!(
                    "track {}: area {} does not match mask ({} set pixels)",
                    s.track_id, s.area, set
                )));
            }
            let in_bounds = (0.0..=record.w as f64).contains(&s.cu) && (0.0..=record.h as f64).contains(&s.cv);
            if !in_bounds {
                return Err(invalid(format!("track {}: centroid ({}, {}) outside frame", s.track_id, s.cu, s.cv)));
            }
            if s.c3d.iter().chain(s.ext.iter()).any(|v| !v.is_finite()) || s.ext.iter().any(|v| *v < 0.0) {
                return Err(invalid(format!("track {}: bad 3D geometry", s.track_id)));
            }
            if s.area < MIN_SEGMENT_AREA {
                log::debug!("frame {}: track {} below minimum area ({} px)", record.frame_id, s.track_id, s.area);
            }
            segments.push(SegmentObservation {
                track_id: s.track_id,
                mask,
                area_px: s.area,
                centroid_px: [s.cu, s.cv],
                centroid_3d: s.c3d,
                extent_3d: s.ext,
                label_gt: s.label_gt,
                small: s.area < MIN_SEGMENT_AREA,
            });
        }

        let t = Timestamp(record.t);
        for s in &segments {
            self.tracks
                .entry(s.track_id)
                .and_modify(|st| {
                    st.observations += 1;
                    st.last_seen = t;
                })
                .or_insert(TrackStats { observations: 1, first_seen: t, last_seen: t });
        }
        self.seen_frames.insert(record.frame_id);
        self.last_t = Some(record.t);

        Ok(IngestedFrame {
            meta: FrameMeta { frame_id: record.frame_id, timestamp: t, pose, width: record.w, height: record.h },
            segments,
            occupancy_ref: record.occupancy_ref,
        })
    }

    /// Ingests a whole stream, stopping at the first error.
    pub fn ingest_all<R: BufRead>(&mut self, reader: R) -> Result<Vec<IngestedFrame>, IngestError> {
        let mut frames = Vec::new();
        for line in reader.lines() {
            if let Some(f) = self.ingest_line(&line?)? {
                frames.push(f);
            }
        }
        Ok(frames)
    }
}
