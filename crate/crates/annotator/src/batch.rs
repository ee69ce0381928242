use sg4d_core::{RleMask, Window};
use sg4d_frameselect::SelectionResult;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationItem {
    pub frame_id: u64,
    pub track_id: u64,
    pub mask: RleMask,
    pub label_gt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationBatch {
    /// Index of the batch within its window.
    pub batch_id: u64,
    pub window_id: u64,
    pub items: Vec<AnnotationItem>,
}

/// Packs every assigned `(fragment, frame)` pair into batches of at most
/// `max_batch` items.
///
/// Items are grouped by frame so each selected frame is referenced as few
/// times as possible. Frame groups are first packed whole (first-fit
/// decreasing, with groups larger than `max_batch` cut into full chunks);
/// if that would need more than `ceil(items / max_batch)` calls, the groups
/// are instead laid out in frame order and cut at every `max_batch` items.
/// Either way the number of batches is exactly `ceil(items / max_batch)`.
pub fn build_batches(selection: &SelectionResult, window: &Window, max_batch: usize) -> Vec<AnnotationBatch> {
    let max_batch = max_batch.max(1);
    let mut groups: Vec<Vec<AnnotationItem>> = Vec::new();
    for &frame_id in &selection.selected_frames {
        let group: Vec<AnnotationItem> = selection
            .assignment
            .iter()
            .filter(|(_, &f)| f == frame_id)
            .filter_map(|(&track_id, _)| {
                let obs = window.track(track_id)?.observation_in(frame_id)?;
                Some(AnnotationItem { frame_id, track_id, mask: obs.mask.clone(), label_gt: obs.label_gt.clone() })
            })
            .collect();
        if !group.is_empty() {
            groups.push(group);
        }
    }
    let total: usize = groups.iter().map(Vec::len).sum();
    if total == 0 {
        return Vec::new();
    }
    let target = total.div_ceil(max_batch);

    let packed = pack_whole_frames(&groups, max_batch);
    let bins = if packed.len() == target { packed } else { pack_sequential(&groups, max_batch) };
    debug_assert_eq!(bins.len(), target);

    bins.into_iter()
        .enumerate()
        .map(|(k, items)| AnnotationBatch { batch_id: k as u64, window_id: window.window_id, items })
        .collect()
}

fn pack_whole_frames(groups: &[Vec<AnnotationItem>], max_batch: usize) -> Vec<Vec<AnnotationItem>> {
    let mut bins: Vec<Vec<AnnotationItem>> = Vec::new();
    let mut rest: Vec<(usize, &[AnnotationItem])> = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        let mut chunks = group.chunks(max_batch);
        let full = group.len() / max_batch;
        for chunk in chunks.by_ref().take(full) {
            bins.push(chunk.to_vec());
        }
        if let Some(tail) = chunks.next() {
            rest.push((g, tail));
        }
    }
    // first-fit decreasing; stable on frame order for equal sizes
    rest.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
    let first_open = bins.len();
    for (_, items) in rest {
        match bins[first_open..].iter_mut().find(|b| b.len() + items.len() <= max_batch) {
            Some(bin) => bin.extend_from_slice(items),
            None => bins.push(items.to_vec()),
        }
    }
    for bin in &mut bins {
        bin.sort_by_key(|it| (it.frame_id, it.track_id));
    }
    bins
}

fn pack_sequential(groups: &[Vec<AnnotationItem>], max_batch: usize) -> Vec<Vec<AnnotationItem>> {
    let flat: Vec<AnnotationItem> = groups.iter().flatten().cloned().collect();
    flat.chunks(max_batch).map(<[AnnotationItem]>::to_vec).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use sg4d_core::{FragmentTrack, FrameMeta, Pose, SegmentObservation, Timestamp, TrackObservation};
    use std::collections::{BTreeMap, BTreeSet};

    /// Window where frame `i` holds `sizes[i]` fragments, each assigned to it.
    fn fixture(sizes: &[usize]) -> (Window, SelectionResult) {
        let mut frames = Vec::new();
        let mut tracks = Vec::new();
        let mut assignment = BTreeMap::new();
        let mut next_track = 0u64;
        for (i, &k) in sizes.iter().enumerate() {
            let meta = FrameMeta {
                frame_id: i as u64,
                timestamp: Timestamp(i as f64),
                pose: Pose::from_yaw([0.0; 3], 0.0),
                width: 4,
                height: 4,
            };
            for _ in 0..k {
                let mask = RleMask::from_spans(4, 4, &[(0, 1)]).unwrap();
                let observation = SegmentObservation {
                    track_id: next_track,
                    mask,
                    area_px: 1,
                    centroid_px: [0.5, 0.5],
                    centroid_3d: [0.0; 3],
                    extent_3d: [0.1; 3],
                    label_gt: None,
                    small: true,
                };
                tracks.push(FragmentTrack {
                    track_id: next_track,
                    observations: vec![TrackObservation { frame_id: i as u64, timestamp: meta.timestamp, observation }],
                });
                assignment.insert(next_track, i as u64);
                next_track += 1;
            }
            frames.push(meta);
        }
        let selection = SelectionResult {
            k_star: sizes.len(),
            epsilon: 0,
            budget: sizes.len(),
            selected_frames: (0..sizes.len() as u64).collect(),
            assignment,
            objective: 0.0,
            nodes: 0,
            optimal: true,
        };
        let w = Window { window_id: 3, start: Timestamp(0.0), end: Timestamp(sizes.len() as f64), frames, tracks };
        (w, selection)
    }

    fn frames_split(batches: &[AnnotationBatch]) -> usize {
        let mut seen: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
        for b in batches {
            for it in &b.items {
                seen.entry(it.frame_id).or_default().insert(b.batch_id);
            }
        }
        seen.values().filter(|s| s.len() > 1).count()
    }

    #[test]
    fn one_frame_four_items_one_batch() {
        let (w, s) = fixture(&[4]);
        let b = build_batches(&s, &w, 128);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].items.len(), 4);
        assert_eq!(b[0].window_id, 3);
    }

    #[test]
    fn nothing_assigned_no_batches() {
        let (w, s) = fixture(&[]);
        assert!(build_batches(&s, &w, 8).is_empty());
    }

    #[test]
    fn hundred_items_nine_frames() {
        let sizes = [12, 11, 11, 11, 11, 11, 11, 11, 11];
        assert_eq!(sizes.iter().sum::<usize>(), 100);
        let (w, s) = fixture(&sizes);
        let b = build_batches(&s, &w, 48);
        assert_eq!(b.len(), 3);
        let mut all: Vec<u64> = b.iter().flat_map(|b| b.items.iter().map(|i| i.track_id)).collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert!(b.iter().all(|b| b.items.len() <= 48));
        assert_eq!(frames_split(&b), 0);
    }

    #[test]
    fn falls_back_to_splitting_when_whole_frames_need_more_calls() {
        let (w, s) = fixture(&[30, 30, 30]);
        let b = build_batches(&s, &w, 48);
        assert_eq!(b.len(), 2);
        assert_eq!(b.iter().map(|b| b.items.len()).sum::<usize>(), 90);
    }

    #[test]
    fn oversized_frame_is_chunked() {
        let (w, s) = fixture(&[100, 5]);
        let b = build_batches(&s, &w, 48);
        assert_eq!(b.len(), 3);
        assert!(b.iter().all(|b| b.items.len() <= 48));
    }

    #[test]
    fn call_count_is_ceiling() {
        for (sizes, max) in [(&[256][..], 64), (&[256][..], 1), (&[7, 9, 3, 50, 1][..], 16), (&[1, 1, 1][..], 2)] {
            let (w, s) = fixture(sizes);
            let total: usize = sizes.iter().sum();
            assert_eq!(build_batches(&s, &w, max).len(), total.div_ceil(max));
        }
    }
}
