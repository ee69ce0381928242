#![allow(dead_code)]

use sg4d_core::{
    DescriptionRecord, FragmentTrack, Interval, RleMask, SegmentObservation, Timestamp, TrackObservation,
};
use sg4d_places::{PlaceNode, PlaceRect, TravState};

pub const DIM: usize = 8;

/// Unit vector along axis `k`, tilted by `tilt` toward the next axis.
pub fn feature(k: usize, tilt: f64) -> Vec<f64> {
    let mut f = vec![0.0; DIM];
    f[k % DIM] = 1.0;
    f[(k + 1) % DIM] = tilt;
    let n = (1.0 + tilt * tilt).sqrt();
    f.iter().map(|x| x / n).collect()
}

pub fn record(text: &str, f: Vec<f64>, start: f64, end: f64) -> DescriptionRecord {
    DescriptionRecord { text: text.into(), feature: f, interval: Interval::new(Timestamp(start), Timestamp(end)) }
}

pub fn track(track_id: u64, t: f64, pos: [f64; 3]) -> FragmentTrack {
    FragmentTrack {
        track_id,
        observations: vec![TrackObservation {
            frame_id: (t * 10.0).round() as u64,
            timestamp: Timestamp(t),
            observation: SegmentObservation {
                track_id,
                mask: RleMask::empty(4, 4),
                area_px: 1,
                centroid_px: [2.0, 2.0],
                centroid_3d: pos,
                extent_3d: [0.2, 0.2, 0.2],
                label_gt: None,
                small: true,
            },
        }],
    }
}

pub fn place(id: u64, xy: [f64; 2], desc: Option<(&str, Vec<f64>)>) -> PlaceNode {
    PlaceNode {
        id,
        rect: PlaceRect { x0: 0, y0: 0, x1: 1, y1: 1 },
        centroid: [xy[0], xy[1], 0.0],
        half_extent: [0.5, 0.5],
        sides: [TravState::Traversable; 4],
        description: desc.map(|(t, f)| record(t, f, 0.0, 1.0)),
    }
}
