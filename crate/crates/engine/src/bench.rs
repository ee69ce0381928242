//! Desk-scale timing: batching call counts, pipeline throughput and
//! selection latency on a large window.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sg4d_annotator::{build_batches, Annotator, MockDescriber};
use sg4d_core::{
    FragmentTrack, FrameMeta, Interval, Pose, RleMask, SegmentObservation, Timestamp, TrackObservation, Window,
};
use sg4d_frameselect::{select_frames, SelectParams, SelectionResult};

use crate::config::RunConfig;
use crate::pipeline::run_config_input;
use crate::stats::render_rows;
use crate::EngineError;

/// Selection latency budget per window, seconds.
pub const SELECT_BUDGET_S: f64 = 2.0;
/// Sensor rate the geometric path should keep up with.
pub const TARGET_FRAMES_PER_S: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchingRow {
    pub items: usize,
    pub max_batch: usize,
    pub calls: u64,
    pub service_per_fragment_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineRow {
    pub frames: usize,
    pub wall_s: f64,
    pub frames_per_s: f64,
    pub fragments_annotated_per_s: f64,
    pub service_per_fragment_s: f64,
    pub meets_sensor_rate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub frames: usize,
    pub fragments: usize,
    pub k_star: usize,
    pub budget: usize,
    pub nodes: u64,
    /// Whether the search finished within its node limit.
    pub optimal: bool,
    pub latency_s: f64,
    pub within_budget: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub batching: Vec<BatchingRow>,
    pub pipeline: PipelineRow,
    pub selection: SelectionRow,
}

impl BenchReport {
    pub fn table(&self) -> String {
        let mut rows: Vec<(&str, String)> = Vec::new();
        for b in &self.batching {
            rows.push((
                "batching",
                format!(
                    "{} items, max_batch {:>3}: {:>3} calls, {:.6} s/fragment",
                    b.items, b.max_batch, b.calls, b.service_per_fragment_s
                ),
            ));
        }
        let p = &self.pipeline;
        rows.push(("pipeline frames", p.frames.to_string()));
        rows.push(("pipeline wall time", format!("{:.3} s", p.wall_s)));
        rows.push((
            "pipeline frame rate",
            format!(
                "{:.1} frames/s ({} the {TARGET_FRAMES_PER_S} Hz sensor rate)",
                p.frames_per_s,
                if p.meets_sensor_rate { "meets" } else { "below" }
            ),
        ));
        rows.push(("annotation rate", format!("{:.1} fragments/s", p.fragments_annotated_per_s)));
        rows.push(("service per fragment", format!("{:.6} s", p.service_per_fragment_s)));
        let s = &self.selection;
        rows.push((
            "selection window",
            format!("{} frames, {} fragments, K* {}, budget {}", s.frames, s.fragments, s.k_star, s.budget),
        ));
        rows.push((
            "selection latency",
            format!(
                "{:.4} s over {} search nodes, {} ({} the {SELECT_BUDGET_S} s budget)",
                s.latency_s,
                s.nodes,
                if s.optimal { "proven optimal" } else { "node limit reached" },
                if s.within_budget { "within" } else { "over" }
            ),
        ));
        render_rows(&rows)
    }
}

/// One frame holding `items` distinct fragments, all assigned to it.
fn flat_job(items: usize) -> (Window, SelectionResult) {
    let t = Timestamp(0.0);
    let (w, h) = (64u32, 64u32);
    let meta = FrameMeta { frame_id: 0, timestamp: t, pose: Pose::from_yaw([0.0; 3], 0.0), width: w, height: h };
    let tracks: Vec<FragmentTrack> = (0..items as u64)
        .map(|j| FragmentTrack {
            track_id: j,
            observations: vec![TrackObservation {
                frame_id: 0,
                timestamp: t,
                observation: SegmentObservation {
                    track_id: j,
                    mask: RleMask::from_spans(w, h, &[(j as usize % (w * h) as usize, 1)]).expect("in bounds"),
                    area_px: 1,
                    centroid_px: [0.5, 0.5],
                    centroid_3d: [0.0; 3],
                    extent_3d: [0.1; 3],
                    label_gt: Some(format!("item {j}")),
                    small: true,
                },
            }],
        })
        .collect();
    let selection = SelectionResult {
        k_star: 1,
        epsilon: 0,
        budget: 1,
        selected_frames: vec![0],
        assignment: tracks.iter().map(|t| (t.track_id, 0)).collect(),
        objective: 0.0,
        nodes: 0,
        optimal: true,
    };
    (Window { window_id: 0, frames: vec![meta], tracks, start: t, end: t }, selection)
}

/// Describes `items` fragments in batches of at most `max_batch` and counts
/// backend calls.
pub fn batching_calls(items: usize, max_batch: usize, service: Duration, seed: u64) -> Result<BatchingRow, EngineError> {
    let (window, selection) = flat_job(items);
    let mut annotator = Annotator::new(Box::new(MockDescriber::new(seed, 32, 32).with_service_time(service)), 32, 32);
    let interval = Interval::new(window.start, window.end);
    let t0 = Instant::now();
    let mut described = 0;
    for batch in build_batches(&selection, &window, max_batch) {
        described += annotator.annotate(&batch, interval).map_err(|e| EngineError::Annotate(e.to_string()))?.len();
    }
    let elapsed = t0.elapsed().as_secs_f64();
    debug_assert_eq!(described, items);
    Ok(BatchingRow {
        items,
        max_batch,
        calls: annotator.calls(),
        service_per_fragment_s: elapsed / items.max(1) as f64,
    })
}

/// A window of `frames` frames over `fragments` tracks, each visible over a
/// contiguous run of frames with varying size and image position.
pub fn random_window(frames: usize, fragments: usize, seed: u64) -> Window {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (640u32, 480u32);
    let metas: Vec<FrameMeta> = (0..frames as u64)
        .map(|k| FrameMeta {
            frame_id: k,
            timestamp: Timestamp(k as f64 * 0.1),
            pose: Pose::from_yaw([0.0; 3], 0.0),
            width: w,
            height: h,
        })
        .collect();
    let tracks = (0..fragments as u64)
        .map(|j| {
            let len = rng.random_range(10..=frames.clamp(10, 80));
            let start = rng.random_range(0..=frames - len.min(frames));
            let observations = (start..(start + len).min(frames))
                .map(|k| {
                    let area = rng.random_range(100u32..20_000);
                    let u = rng.random_range(1.0..w as f64 - 1.0);
                    let v = rng.random_range(1.0..h as f64 - 1.0);
                    let s = (area as usize).min((w * h) as usize);
                    TrackObservation {
                        frame_id: k as u64,
                        timestamp: metas[k].timestamp,
                        observation: SegmentObservation {
                            track_id: j,
                            mask: RleMask::from_spans(w, h, &[(0, s)]).expect("in bounds"),
                            area_px: area,
                            centroid_px: [u, v],
                            centroid_3d: [0.0; 3],
                            extent_3d: [0.1; 3],
                            label_gt: None,
                            small: false,
                        },
                    }
                })
                .collect();
            FragmentTrack { track_id: j, observations }
        })
        .collect();
    Window { window_id: 0, start: metas[0].timestamp, end: metas[frames - 1].timestamp, frames: metas, tracks }
}

pub fn selection_latency(frames: usize, fragments: usize, params: &SelectParams, seed: u64) -> Result<SelectionRow, EngineError> {
    let window = random_window(frames, fragments, seed);
    let t0 = Instant::now();
    let sel = select_frames(&window, params).map_err(|source| EngineError::Select { window: 0, source })?;
    let latency_s = t0.elapsed().as_secs_f64();
    Ok(SelectionRow {
        frames,
        fragments,
        k_star: sel.k_star,
        budget: sel.budget,
        nodes: sel.nodes,
        optimal: sel.optimal,
        latency_s,
        within_budget: latency_s <= SELECT_BUDGET_S,
    })
}

/// Runs the whole benchmark. The pipeline part runs `cfg` (the synthesized
/// scene unless an input is configured) without writing outputs.
pub fn bench(cfg: &RunConfig) -> Result<BenchReport, EngineError> {
    let service = Duration::from_secs_f64(cfg.describer.mock_service_s);
    let batching = [1, cfg.describer.max_batch.max(1)]
        .into_iter()
        .map(|mb| batching_calls(256, mb, service, cfg.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let run = run_config_input(cfg, None)?;
    let t = &run.stats.timing;
    let pipeline = PipelineRow {
        frames: run.stats.frames,
        wall_s: t.wall_s,
        frames_per_s: t.frames_per_s,
        fragments_annotated_per_s: t.fragments_annotated_per_s,
        service_per_fragment_s: t.service_per_fragment_s.mean,
        meets_sensor_rate: t.frames_per_s >= TARGET_FRAMES_PER_S,
    };
    let selection = selection_latency(300, 100, &cfg.select, cfg.seed)?;
    Ok(BenchReport { batching, pipeline, selection })
}
