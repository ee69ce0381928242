use std::collections::BTreeMap;

use sg4d_core::description::mean_feature;
use sg4d_core::{DescriptionRecord, Interval};

use crate::graph::PlaceNode;

/// Flat fragments at most this thick (half-height, meters) can be ground.
pub const GROUND_MAX_HALF_HEIGHT: f64 = 0.1;
/// Ground fragments span at least this much (half-width, meters) in x and y.
pub const GROUND_MIN_HALF_WIDTH: f64 = 0.25;

/// Whether a fragment's 3D half-extent makes it a ground fragment.
pub fn is_ground_fragment(half_extent: [f64; 3]) -> bool {
    half_extent[2] <= GROUND_MAX_HALF_HEIGHT
        && half_extent[0] >= GROUND_MIN_HALF_WIDTH
        && half_extent[1] >= GROUND_MIN_HALF_WIDTH
}

/// Whether a ground fragment with the given 3D centroid and half-extent
/// covers a place's ground point, with `z_tol` slack in height.
pub fn ground_fragment_covers(place: &PlaceNode, centroid: [f64; 3], half_extent: [f64; 3], z_tol: f64) -> bool {
    let p = place.centroid;
    (p[0] - centroid[0]).abs() <= half_extent[0]
        && (p[1] - centroid[1]).abs() <= half_extent[1]
        && (p[2] - centroid[2]).abs() <= half_extent[2] + z_tol
}

/// Lifts a place with the annotations of the ground fragments covering it.
///
/// The most frequent text wins; among equally frequent texts the one seen
/// first wins. The place feature is the normalized mean of the winning
/// annotations' features, and its interval spans them. Without annotations
/// the place stays undescribed.
pub fn lift_place(node: &mut PlaceNode, annotations: &[DescriptionRecord]) {
    let mut by_text: BTreeMap<&str, Vec<&DescriptionRecord>> = BTreeMap::new();
    for a in annotations {
        by_text.entry(a.text.as_str()).or_default().push(a);
    }
    let first_seen = |v: &[&DescriptionRecord]| v.iter().map(|a| a.interval.start.0).fold(f64::INFINITY, f64::min);
    let winner = by_text.into_values().max_by(|a, b| {
        a.len()
            .cmp(&b.len())
            .then_with(|| first_seen(b).total_cmp(&first_seen(a)))
    });
    node.description = winner.and_then(|votes| {
        let feature = mean_feature(votes.iter().map(|a| a.feature.as_slice()))?;
        let start = votes.iter().map(|a| a.interval.start).fold(votes[0].interval.start, |m, t| if t.0 < m.0 { t } else { m });
        let end = votes.iter().map(|a| a.interval.end).fold(votes[0].interval.end, |m, t| if t.0 > m.0 { t } else { m });
        Some(DescriptionRecord { text: votes[0].text.clone(), feature, interval: Interval::new(start, end) })
    });
}
