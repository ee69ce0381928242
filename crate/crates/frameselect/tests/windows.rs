//! Selection driven from windows built the way ingestion builds them.

use sg4d_core::{FragmentTrack, FrameMeta, Pose, RleMask, SegmentObservation, Timestamp, TrackObservation, Window};
use sg4d_frameselect::{position_score, select_frames, SelectParams};

const W: u32 = 640;
const H: u32 = 480;

/// Rectangle mask of `side × side` pixels centered at `(cu, cv)`.
fn square(track_id: u64, cu: u32, cv: u32, side: u32) -> SegmentObservation {
    let (u0, v0) = (cu - side / 2, cv - side / 2);
    let spans: Vec<(usize, usize)> = (v0..v0 + side).map(|v| ((v * W + u0) as usize, side as usize)).collect();
    let mask = RleMask::from_spans(W, H, &spans).unwrap();
    let (u, v) = mask.centroid().unwrap();
    SegmentObservation {
        track_id,
        area_px: mask.count_set() as u32,
        mask,
        centroid_px: [u, v],
        centroid_3d: [0.0; 3],
        extent_3d: [0.2; 3],
        label_gt: None,
        small: false,
    }
}

fn window(frames: Vec<Vec<SegmentObservation>>) -> Window {
    let metas: Vec<FrameMeta> = (0..frames.len() as u64)
        .map(|i| FrameMeta {
            frame_id: i + 1,
            timestamp: Timestamp(i as f64 * 0.1),
            pose: Pose::from_yaw([0.0; 3], 0.0),
            width: W,
            height: H,
        })
        .collect();
    let mut tracks: Vec<FragmentTrack> = Vec::new();
    for (meta, segs) in metas.iter().zip(frames) {
        for s in segs {
            let obs = TrackObservation { frame_id: meta.frame_id, timestamp: meta.timestamp, observation: s };
            match tracks.iter_mut().find(|t| t.track_id == obs.observation.track_id) {
                Some(t) => t.observations.push(obs),
                None => tracks.push(FragmentTrack { track_id: obs.observation.track_id, observations: vec![obs] }),
            }
        }
    }
    tracks.sort_by_key(|t| t.track_id);
    Window { window_id: 0, start: metas[0].timestamp, end: metas.last().unwrap().timestamp, frames: metas, tracks }
}

/// Three frames with car, tree, hydrant and person. Frame 1 shows all four
/// small and near the left edge, frame 2 shows all four large and near the
/// center, frame 3 misses the hydrant and the person.
fn three_frame_street() -> Window {
    let (car, tree, hydrant, person) = (1, 2, 3, 4);
    window(vec![
        vec![square(car, 40, 100, 20), square(tree, 60, 300, 30), square(hydrant, 30, 200, 18), square(person, 80, 400, 24)],
        vec![square(car, 250, 200, 120), square(tree, 400, 200, 110), square(hydrant, 280, 320, 90), square(person, 380, 300, 100)],
        vec![square(car, 560, 240, 80), square(tree, 600, 120, 60)],
    ])
}

#[test]
fn street_example_picks_frame_two() {
    let w = three_frame_street();
    let params = SelectParams { epsilon: 0, ..SelectParams::default() };
    let r = select_frames(&w, &params).unwrap();
    assert_eq!(r.k_star, 1);
    assert_eq!(r.selected_frames, vec![2]);
    assert_eq!(r.assignment.len(), 4);
    assert!(r.assignment.values().all(|&f| f == 2));
}

#[test]
fn dominant_frame_wins_even_with_slack() {
    // frame 2 shows every fragment centered and large; frame 1 and 3 show
    // them small and off-center, so the extra slack frame cannot help
    let w = window(vec![
        vec![square(1, 30, 30, 10), square(2, 50, 30, 10)],
        vec![square(1, 300, 240, 150), square(2, 340, 240, 150)],
        vec![square(1, 610, 450, 10), square(2, 590, 450, 10)],
    ]);
    let r = select_frames(&w, &SelectParams::default()).unwrap();
    assert_eq!(r.k_star, 1);
    assert_eq!(r.budget, 2);
    assert!(r.selected_frames.contains(&2));
    assert!(r.assignment.values().all(|&f| f == 2));
}

#[test]
fn centered_square_scores_near_one() {
    let s = square(1, 320, 240, 40);
    assert!(position_score(s.centroid_px, W as f64, H as f64).unwrap() > 0.999);
}
