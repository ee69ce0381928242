use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sg4d_core::description::mean_feature;
use sg4d_core::geom::Vec3;
use sg4d_core::{DescriptionRecord, Interval, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectNode {
    pub node_id: u64,
    pub track_ids: BTreeSet<u64>,
    /// One centroid per window, time-ordered.
    pub centroid_t: Vec<(Timestamp, Vec3)>,
    /// Half sizes in meters.
    pub extent: Vec3,
    /// Ordered by interval start.
    pub history: Vec<DescriptionRecord>,
    /// Normalized mean of the history features.
    pub feature: Vec<f64>,
    pub first_seen: Timestamp,
    pub last_seen: Timestamp,
}

impl ObjectNode {
    pub fn latest_centroid(&self) -> Vec3 {
        self.centroid_t.last().map(|c| c.1).unwrap_or_default()
    }

    pub fn latest_description(&self) -> &str {
        self.history
            .iter()
            .max_by(|a, b| a.interval.start.0.total_cmp(&b.interval.start.0))
            .map_or("", |d| d.text.as_str())
    }

    pub fn timeline(&self) -> Vec<Interval> {
        self.history.iter().map(|d| d.interval).collect()
    }

    pub(crate) fn add_centroid(&mut self, t: Timestamp, c: Vec3) {
        let at = self.centroid_t.partition_point(|(s, _)| s.0 <= t.0);
        self.centroid_t.insert(at, (t, c));
    }

    pub(crate) fn add_description(&mut self, record: DescriptionRecord) {
        let at = self.history.partition_point(|d| d.interval.start.0 <= record.interval.start.0);
        self.history.insert(at, record);
        self.refresh_feature();
    }

    pub(crate) fn refresh_feature(&mut self) {
        if let Some(f) = mean_feature(self.history.iter().map(|d| d.feature.as_slice())) {
            self.feature = f;
        }
    }

    /// Distance between the closest-in-time centroid samples of two nodes;
    /// among equally close times the smaller distance counts.
    pub fn temporal_distance(&self, other: &ObjectNode) -> Option<f64> {
        let mut best: Option<(f64, f64)> = None;
        for (ta, ca) in &self.centroid_t {
            for (tb, cb) in &other.centroid_t {
                let key = ((ta.0 - tb.0).abs(), sg4d_core::geom::dist(*ca, *cb));
                if best.is_none_or(|b| key.0 < b.0 || (key.0 == b.0 && key.1 < b.1)) {
                    best = Some(key);
                }
            }
        }
        best.map(|b| b.1)
    }

    /// Absorbs another node's tracks, samples and history.
    pub(crate) fn absorb(&mut self, other: ObjectNode) {
        self.track_ids.extend(other.track_ids);
        for (t, c) in other.centroid_t {
            self.add_centroid(t, c);
        }
        for (e, o) in self.extent.iter_mut().zip(other.extent) {
            *e = e.max(o);
        }
        for d in other.history {
            let at = self.history.partition_point(|h| h.interval.start.0 <= d.interval.start.0);
            self.history.insert(at, d);
        }
        self.refresh_feature();
        if other.first_seen.0 < self.first_seen.0 {
            self.first_seen = other.first_seen;
        }
        if other.last_seen.0 > self.last_seen.0 {
            self.last_seen = other.last_seen;
        }
    }
}
