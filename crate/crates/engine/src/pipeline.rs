//! The streaming pipeline.
//!
//! Three contexts connected by channels and the bounded annotation queue:
//! ingestion and geometry on the calling thread (parsing, windowing, frame
//! selection, places extraction), the annotation worker, and the graph
//! writer, which owns the scene graph and finalizes it once the stream ends.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Arc;
use std::time::Instant;

use sg4d_annotator::{spawn_worker, AnnotationOutput, Annotator, Job, WindowQueue, WorkerStats};
use sg4d_core::{DescriptionRecord, OccupancySnapshot, StreamIngestor, Window, WindowAccumulator};
use sg4d_frameselect::select_frames;
use sg4d_places::{build_places_graph, ground_fragment_covers, is_ground_fragment, lift_place, traversability, PlacesGraph};
use sg4d_scenegraph::{
    cluster_regions, compute_region_visits, reconcile, summarize_regions, GraphHandle, SceneGraph4D,
};

use crate::config::RunConfig;
use crate::generate::{generate, OCCUPANCY_FILE};
use crate::stats::{RunStats, Summary, WindowStats};
use crate::EngineError;

pub const GRAPH_FILE: &str = "graph.json";
pub const STATS_FILE: &str = "stats.json";
pub const WINDOWS_CSV: &str = "windows.csv";
pub const TABLE_FILE: &str = "stats.txt";

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub graph: SceneGraph4D,
    pub stats: RunStats,
}

enum WriterMsg {
    Places { snapshot_id: u64, resolution: f64, graph: PlacesGraph },
    Window { window: Window, stats: WindowStats },
    Dropped(u64),
}

struct GroundRecord {
    centroid: [f64; 3],
    half_extent: [f64; 3],
    record: DescriptionRecord,
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    graph: SceneGraph4D,
    pending: BTreeMap<u64, (Window, WindowStats)>,
    done: Vec<WindowStats>,
    ground: Vec<GroundRecord>,
    resolutions: BTreeMap<u64, f64>,
    object_merges: usize,
    place_merges: usize,
    annotated: usize,
    handle: Option<GraphHandle>,
}

impl<'a> Writer<'a> {
    fn apply(&mut self, msg: WriterMsg) -> Result<(), EngineError> {
        match msg {
            WriterMsg::Places { snapshot_id, resolution, graph } => {
                self.resolutions.insert(snapshot_id, resolution);
                self.graph.integrate_places(snapshot_id, graph);
            }
            WriterMsg::Window { window, stats } => {
                for f in &window.frames {
                    self.graph.record_agent_pose(f.timestamp, f.pose)?;
                }
                self.pending.insert(window.window_id, (window, stats));
            }
            WriterMsg::Dropped(id) => {
                if let Some((_, mut stats)) = self.pending.remove(&id) {
                    stats.dropped = true;
                    self.done.push(stats);
                }
            }
        }
        Ok(())
    }

    fn annotated(
        &mut self,
        window_id: u64,
        records: Vec<(u64, u64, DescriptionRecord)>,
        batch_sizes: Vec<usize>,
        latency_s: f64,
    ) -> Result<(), EngineError> {
        let (window, mut stats) = self
            .pending
            .remove(&window_id)
            .ok_or_else(|| EngineError::Annotate(format!("output for unknown window {window_id}")))?;
        stats.records = records.len();
        stats.batch_sizes = batch_sizes;
        stats.annotate_latency_s = Some(latency_s);
        self.annotated += records.len();
        for (track_id, frame_id, record) in records {
            let track = window
                .track(track_id)
                .ok_or_else(|| EngineError::Annotate(format!("record for unknown track {track_id}")))?;
            let obs = track
                .observation_in(frame_id)
                .ok_or_else(|| EngineError::Annotate(format!("track {track_id} not in frame {frame_id}")))?;
            if is_ground_fragment(obs.extent_3d) {
                self.ground.push(GroundRecord { centroid: obs.centroid_3d, half_extent: obs.extent_3d, record });
            } else {
                self.graph.upsert_fragment(track, record)?;
            }
        }
        if self.cfg.reconcile_each_window {
            self.merge();
        }
        self.done.push(stats);
        if let Some(h) = &self.handle {
            h.publish(self.graph.clone());
        }
        Ok(())
    }

    fn merge(&mut self) {
        let report = reconcile(&mut self.graph, &self.cfg.reconcile);
        self.object_merges += report.object_merges.len();
        self.place_merges += report.place_merges.len();
    }

    fn finalize(&mut self) {
        self.merge();
        for node in &mut self.graph.places.nodes {
            let z_tol = self
                .graph
                .place_sources
                .get(&node.id)
                .and_then(|s| self.resolutions.get(s))
                .copied()
                .unwrap_or(0.0);
            let votes: Vec<DescriptionRecord> = self
                .ground
                .iter()
                .filter(|g| ground_fragment_covers(node, g.centroid, g.half_extent, z_tol))
                .map(|g| g.record.clone())
                .collect();
            lift_place(node, &votes);
        }
        cluster_regions(&mut self.graph, &self.cfg.regions);
        summarize_regions(&mut self.graph, None);
        compute_region_visits(&mut self.graph);
        if let Some(h) = &self.handle {
            h.publish(self.graph.clone());
        }
    }
}

fn writer_loop(
    writer: &mut Writer<'_>,
    geom_rx: &Receiver<WriterMsg>,
    ann_rx: &Receiver<AnnotationOutput>,
) -> Result<(), EngineError> {
    for out in ann_rx.iter() {
        let window_id = match &out {
            AnnotationOutput::Annotated { window_id, .. } | AnnotationOutput::Failed { window_id, .. } => *window_id,
        };
        // geometry for a window is always sent before its job is queued
        while !writer.pending.contains_key(&window_id) {
            match geom_rx.recv() {
                Ok(msg) => writer.apply(msg)?,
                Err(_) => break,
            }
        }
        match out {
            AnnotationOutput::Annotated { window_id, records, batch_sizes, latency, .. } => {
                writer.annotated(window_id, records, batch_sizes, latency.as_secs_f64())?
            }
            AnnotationOutput::Failed { window_id, error } => {
                return Err(EngineError::Annotate(format!("window {window_id}: {error}")));
            }
        }
    }
    for msg in geom_rx.iter() {
        writer.apply(msg)?;
    }
    for (_, (_, mut stats)) in std::mem::take(&mut writer.pending) {
        stats.dropped = true;
        writer.done.push(stats);
    }
    Ok(())
}

/// Source of occupancy snapshots named by frame records.
pub type OccupancyResolver<'a> = dyn FnMut(&str) -> Result<OccupancySnapshot, EngineError> + 'a;

/// Runs the pipeline over a frame stream without touching the filesystem.
/// If `handle` is given, the graph is published after every window.
pub fn run_stream(
    cfg: &RunConfig,
    reader: impl BufRead,
    resolve: &mut OccupancyResolver<'_>,
    handle: Option<GraphHandle>,
) -> Result<RunOutput, EngineError> {
    cfg.validate()?;
    let started = Instant::now();
    let describer = cfg.describer();
    let backend = describer.connect().map_err(|e| EngineError::Annotate(e.to_string()))?;
    let annotator = Annotator::new(backend, describer.d1, describer.d2);
    let queue = Arc::new(WindowQueue::new(cfg.queue.capacity, cfg.queue.overflow));
    let (ann_tx, ann_rx) = channel();
    let worker = spawn_worker(Arc::clone(&queue), annotator, describer.max_batch, ann_tx);
    let (geom_tx, geom_rx) = channel();
    let abort = AtomicBool::new(false);

    let mut writer = Writer {
        cfg,
        graph: SceneGraph4D::new(),
        pending: BTreeMap::new(),
        done: Vec::new(),
        ground: Vec::new(),
        resolutions: BTreeMap::new(),
        object_merges: 0,
        place_merges: 0,
        annotated: 0,
        handle,
    };

    let (ingest_result, writer_result, worker_stats) = std::thread::scope(|s| {
        let (writer, abort) = (&mut writer, &abort);
        let writer_thread = s.spawn(move || {
            let r = writer_loop(writer, &geom_rx, &ann_rx);
            if r.is_err() {
                abort.store(true, Ordering::SeqCst);
                // keep draining so the worker and producer never block on us
                for _ in ann_rx.iter() {}
                for _ in geom_rx.iter() {}
            }
            r
        });
        let ingest_result = ingest(cfg, reader, resolve, &queue, &geom_tx, abort);
        queue.close();
        drop(geom_tx);
        let worker_stats = worker.join().unwrap_or_default();
        let writer_result = writer_thread.join().expect("graph writer panicked");
        (ingest_result, writer_result, worker_stats)
    });
    let ingest_stats = ingest_result?;
    writer_result?;

    let t_final = Instant::now();
    writer.graph.meta.insert(
        "describer".into(),
        serde_json::json!({
            "endpoint": String::from(describer.endpoint.clone()),
            "d1": describer.d1,
            "d2": describer.d2,
            "seed": describer.mock_seed,
        }),
    );
    writer.graph.meta.insert("window".into(), serde_json::json!(cfg.window));
    writer.finalize();
    let finalize_s = t_final.elapsed().as_secs_f64();

    let mut windows = writer.done;
    windows.sort_by_key(|w| w.window_id);
    let wall_s = started.elapsed().as_secs_f64();
    let stats = assemble_stats(
        &ingest_stats,
        windows,
        &worker_stats,
        queue.dropped(),
        &writer.graph,
        (writer.annotated, writer.ground.len(), writer.object_merges, writer.place_merges),
        wall_s,
        finalize_s,
    );
    Ok(RunOutput { graph: writer.graph, stats })
}

struct IngestStats {
    frames: usize,
    places_s: f64,
}

fn ingest(
    cfg: &RunConfig,
    reader: impl BufRead,
    resolve: &mut OccupancyResolver<'_>,
    queue: &WindowQueue<Job>,
    geom_tx: &Sender<WriterMsg>,
    abort: &AtomicBool,
) -> Result<IngestStats, EngineError> {
    let mut ingestor = StreamIngestor::new();
    let mut acc = WindowAccumulator::new(cfg.window).map_err(|e| EngineError::Config(e.to_string()))?;
    let mut snapshots: BTreeMap<String, u64> = BTreeMap::new();
    let mut stats = IngestStats { frames: 0, places_s: 0.0 };

    let dispatch = |window: Window| -> Result<(), EngineError> {
        let t0 = Instant::now();
        let selection = select_frames(&window, &cfg.select)
            .map_err(|source| EngineError::Select { window: window.window_id, source })?;
        let ws = WindowStats {
            window_id: window.window_id,
            frames: window.frames.len(),
            fragments: window.tracks.len(),
            k_star: selection.k_star,
            selected_frames: selection.selected_frames.len(),
            assigned: selection.assignment.len(),
            select_s: t0.elapsed().as_secs_f64(),
            ..Default::default()
        };
        let _ = geom_tx.send(WriterMsg::Window { window: window.clone(), stats: ws });
        if let Some(evicted) = queue.push(Job::new(window, selection)) {
            let _ = geom_tx.send(WriterMsg::Dropped(evicted.window.window_id));
        }
        Ok(())
    };

    for line in reader.lines() {
        if abort.load(Ordering::SeqCst) {
            break;
        }
        let line = line.map_err(|e| EngineError::Io { path: PathBuf::from("<stream>"), source: e })?;
        let Some(frame) = ingestor.ingest_line(&line)? else { continue };
        stats.frames += 1;
        if let Some(name) = &frame.occupancy_ref {
            if !snapshots.contains_key(name) {
                let snapshot_id = snapshots.len() as u64;
                snapshots.insert(name.clone(), snapshot_id);
                let t0 = Instant::now();
                let occ = resolve(name)?;
                let field = traversability(&occ, cfg.places.robot_box)?;
                let graph = build_places_graph(&field, cfg.places.max_side_m, 0)?;
                stats.places_s += t0.elapsed().as_secs_f64();
                let _ = geom_tx.send(WriterMsg::Places { snapshot_id, resolution: occ.resolution, graph });
            }
        }
        if let Some(window) = acc.push(frame.meta, frame.segments) {
            dispatch(window)?;
        }
    }
    if stats.frames == 0 {
        return Err(EngineError::NoFrames);
    }
    if !acc.is_empty() && !abort.load(Ordering::SeqCst) {
        dispatch(acc.close().expect("non-empty"))?;
    }
    Ok(stats)
}

#[allow(clippy::too_many_arguments)]
fn assemble_stats(
    ingest: &IngestStats,
    windows: Vec<WindowStats>,
    worker: &WorkerStats,
    dropped: u64,
    graph: &SceneGraph4D,
    (annotated, ground, object_merges, place_merges): (usize, usize, usize, usize),
    wall_s: f64,
    finalize_s: f64,
) -> RunStats {
    let select: Vec<f64> = windows.iter().map(|w| w.select_s).collect();
    let latency: Vec<f64> = windows.iter().filter_map(|w| w.annotate_latency_s).collect();
    let per_s = |n: usize| if wall_s > 0.0 { n as f64 / wall_s } else { 0.0 };
    RunStats {
        frames: ingest.frames,
        fragments_annotated: annotated,
        backend_calls: worker.calls,
        dropped_windows: dropped,
        ground_records: ground,
        object_merges,
        place_merges,
        objects: graph.objects.len(),
        places: graph.places.nodes.len(),
        regions: graph.regions.len(),
        timing: crate::stats::Timing {
            wall_s,
            frames_per_s: per_s(ingest.frames),
            fragments_annotated_per_s: per_s(annotated),
            select_s: Summary::of(&select),
            annotate_latency_s: Summary::of(&latency),
            service_per_fragment_s: Summary::of(&worker.service_per_fragment_s),
            places_s: ingest.places_s,
            finalize_s,
        },
        windows,
    }
}

/// Resolves snapshot names against a directory.
pub fn directory_resolver(dir: PathBuf) -> impl FnMut(&str) -> Result<OccupancySnapshot, EngineError> {
    move |name| {
        let path = dir.join(name);
        OccupancySnapshot::load(&path).map_err(|e| EngineError::Occupancy(format!("{}: {e}", path.display())))
    }
}

/// Runs the configured input (a stream file, or the synthesized scene) and
/// writes the graph and stats into the output directory.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunOutput, EngineError> {
    let out = run_config_input(cfg, None)?;
    write_outputs(&cfg.output, &out)?;
    Ok(out)
}

/// Like [`run_pipeline`] without writing anything.
pub fn run_config_input(cfg: &RunConfig, handle: Option<GraphHandle>) -> Result<RunOutput, EngineError> {
    match &cfg.input {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| EngineError::Io { path: path.clone(), source: e })?;
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            let mut resolve = directory_resolver(dir);
            run_stream(cfg, std::io::BufReader::new(file), &mut resolve, handle)
        }
        None => {
            let spec = cfg.scene.clone().unwrap_or_default();
            let scene = generate(&spec)?;
            let occupancy = scene.occupancy;
            let mut resolve = |name: &str| {
                if name == OCCUPANCY_FILE {
                    Ok(occupancy.clone())
                } else {
                    Err(EngineError::Occupancy(format!("unknown snapshot {name:?}")))
                }
            };
            let text = scene.frames.iter().map(|f| f.to_json_line() + "\n").collect::<String>();
            run_stream(cfg, text.as_bytes(), &mut resolve, handle)
        }
    }
}

pub fn write_outputs(dir: &Path, out: &RunOutput) -> Result<(), EngineError> {
    let io = |path: PathBuf| move |source: std::io::Error| EngineError::Io { path, source };
    std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
    let graph_path = dir.join(GRAPH_FILE);
    out.graph.save(&graph_path)?;
    for (name, text) in [
        (STATS_FILE, out.stats.to_json()),
        (WINDOWS_CSV, out.stats.windows_csv()),
        (TABLE_FILE, out.stats.table()),
    ] {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(io(p.clone()))?;
    }
    Ok(())
}
