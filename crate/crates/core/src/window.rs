//! Fixed-length, non-overlapping windows over the frame stream.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::types::{FragmentTrack, FrameMeta, SegmentObservation, TrackObservation, Window};

/// Frames per window (about 5 s at 10 Hz).
pub const DEFAULT_WINDOW_LEN: usize = 50;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WindowError {
    #[error("cannot close an empty window")]
    Empty,
    #[error("window length must be at least 1")]
    ZeroLength,
}

#[derive(Debug)]
pub struct WindowAccumulator {
    len: usize,
    next_id: u64,
    frames: Vec<FrameMeta>,
    observations: BTreeMap<u64, Vec<TrackObservation>>,
}

impl WindowAccumulator {
    pub fn new(len: usize) -> Result<Self, WindowError> {
        if len == 0 {
            return Err(WindowError::ZeroLength);
        }
        Ok(Self { len, next_id: 0, frames: Vec::with_capacity(len), observations: BTreeMap::new() })
    }

    pub fn window_len(&self) -> usize {
        self.len
    }

    pub fn pending_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Adds one frame. Returns the closed window once `len` frames have
    /// accumulated.
    pub fn push(&mut self, frame: FrameMeta, segments: Vec<SegmentObservation>) -> Option<Window> {
        for s in segments {
            self.observations.entry(s.track_id).or_default().push(TrackObservation {
                frame_id: frame.frame_id,
                timestamp: frame.timestamp,
                observation: s,
            });
        }
        self.frames.push(frame);
        (self.frames.len() >= self.len).then(|| self.close().expect("non-empty"))
    }

    /// Emits everything accumulated since the previous boundary and resets.
    pub fn close(&mut self) -> Result<Window, WindowError> {
        if self.frames.is_empty() {
            return Err(WindowError::Empty);
        }
        let frames = std::mem::replace(&mut self.frames, Vec::with_capacity(self.len));
        let tracks = std::mem::take(&mut self.observations)
            .into_iter()
            .map(|(track_id, observations)| FragmentTrack { track_id, observations })
            .collect();
        let window = Window {
            window_id: self.next_id,
            start: frames.first().unwrap().timestamp,
            end: frames.last().unwrap().timestamp,
            frames,
            tracks,
        };
        self.next_id += 1;
        Ok(window)
    }
}
