use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use sg4d_annotator::{Endpoint, OverflowPolicy};
use sg4d_engine::generate::generate;
use sg4d_engine::pipeline::{directory_resolver, GRAPH_FILE, STATS_FILE, TABLE_FILE, WINDOWS_CSV};
use sg4d_engine::{run_config_input, run_pipeline, run_stream, EngineError, RunConfig, SceneSpec};
use sg4d_scenegraph::{GraphHandle, SceneGraph4D};

fn run(cfg: &RunConfig) -> sg4d_engine::RunOutput {
    run_config_input(cfg, None).unwrap()
}

#[test]
fn two_room_run_recovers_objects_rooms_and_visits() {
    let spec = SceneSpec::two_rooms();
    let manifest = generate(&spec).unwrap().manifest;
    let out = run(&RunConfig::default());
    let g = &out.graph;

    let mut labels: Vec<String> =
        g.objects.values().map(|o| o.latest_description().trim_start_matches("a ").to_string()).collect();
    labels.sort();
    let mut truth: Vec<String> = manifest.objects.iter().map(|o| o.label.clone()).collect();
    truth.sort();
    assert_eq!(labels, truth);
    for o in g.objects.values() {
        let label = o.latest_description().trim_start_matches("a ");
        let t = manifest.objects.iter().find(|m| m.label == label).unwrap();
        let c = o.latest_centroid();
        assert!((0..3).all(|k| (c[k] - t.center[k]).abs() < 1e-9));
    }

    assert_eq!(g.regions.len(), 2);
    let room_of = |rid: u64| {
        let r = &g.regions[&rid];
        let p = g.places.node(*r.place_ids.first().unwrap()).unwrap();
        spec.room_index([p.centroid[0], p.centroid[1]]).map(|i| spec.rooms[i].name.clone()).unwrap()
    };
    let visits: BTreeMap<String, usize> = g.regions.values().map(|r| (room_of(r.region_id), r.visits.len())).collect();
    assert_eq!(visits, manifest.visits_per_room());
    for r in g.regions.values() {
        let room = room_of(r.region_id);
        for oid in &r.object_ids {
            let label = g.objects[oid].latest_description().trim_start_matches("a ");
            let t = manifest.objects.iter().find(|m| m.label == label).unwrap();
            assert_eq!(t.room.as_deref(), Some(room.as_str()), "{label}");
        }
    }
    out.stats.check_consistency().unwrap();
    assert_eq!(out.stats.frames, 600);
    assert_eq!(out.stats.windows.len(), 12);
}

#[test]
fn described_places_carry_their_room_floor() {
    let spec = SceneSpec::two_rooms();
    let out = run(&RunConfig::default());
    let described: Vec<_> = out.graph.places.nodes.iter().filter(|p| p.is_described()).collect();
    assert!(!described.is_empty());
    let matching = described
        .iter()
        .filter(|p| {
            let text = &p.description.as_ref().unwrap().text;
            spec.rooms.iter().any(|r| r.contains([p.centroid[0], p.centroid[1]]) && text.ends_with(&r.floor_label))
        })
        .count();
    assert!(matching as f64 >= 0.95 * described.len() as f64, "{matching}/{}", described.len());
}

#[test]
fn empty_stream_is_an_error() {
    let cfg = RunConfig::default();
    let mut resolve = directory_resolver(".".into());
    let err = run_stream(&cfg, "\n\n".as_bytes(), &mut resolve, None).unwrap_err();
    assert!(matches!(err, EngineError::NoFrames));
    assert_eq!(err.to_string(), "no frames");
}

#[test]
fn errors_name_their_module() {
    let cfg = RunConfig::default();
    let scene = generate(&SceneSpec::two_rooms()).unwrap();
    let mut text = scene.stream_text();
    text.push_str("{not json}\n");
    let mut resolve = |_: &str| Ok(scene.occupancy.clone());
    let err = run_stream(&cfg, text.as_bytes(), &mut resolve, None).unwrap_err();
    assert!(err.to_string().starts_with("ingest: "), "{err}");

    let mut missing = directory_resolver(std::env::temp_dir().join("sg4d-no-such-dir"));
    let err = run_stream(&cfg, scene.stream_text().as_bytes(), &mut missing, None).unwrap_err();
    assert!(err.to_string().starts_with("occupancy: "), "{err}");

    let mut bad = RunConfig::default();
    bad.window = 0;
    assert!(run_config_input(&bad, None).unwrap_err().to_string().starts_with("config: "));
}

#[test]
fn failing_describer_aborts_without_hanging() {
    let mut cfg = RunConfig::default();
    cfg.describer.endpoint = Endpoint::Command("true".into());
    cfg.describer.timeout_s = 2.0;
    let t0 = Instant::now();
    let err = run_config_input(&cfg, None).unwrap_err();
    assert!(err.to_string().starts_with("annotator: "), "{err}");
    assert!(t0.elapsed() < Duration::from_secs(30));
}

#[test]
fn same_seed_gives_identical_graph_bytes() {
    let a = run(&RunConfig::default());
    let b = run(&RunConfig::default());
    assert_eq!(a.graph.to_bytes().unwrap(), b.graph.to_bytes().unwrap());
    assert_eq!(a.stats.without_timing(), b.stats.without_timing());
    let mut other = RunConfig::default();
    other.seed = 1;
    assert_ne!(run(&other).graph.to_bytes().unwrap(), a.graph.to_bytes().unwrap());
}

#[test]
fn replay_from_files_matches_in_memory_run() {
    let dir = tempfile::tempdir().unwrap();
    let scene_dir = dir.path().join("scene");
    generate(&SceneSpec::two_rooms()).unwrap().write_to(&scene_dir).unwrap();
    let mut cfg = RunConfig::default();
    cfg.input = Some(scene_dir.join("stream.jsonl"));
    cfg.output = dir.path().join("out");
    let replay = run_pipeline(&cfg).unwrap();
    let memory = run(&RunConfig::default());
    assert_eq!(replay.graph.to_bytes().unwrap(), memory.graph.to_bytes().unwrap());
    for f in [GRAPH_FILE, STATS_FILE, WINDOWS_CSV, TABLE_FILE] {
        assert!(cfg.output.join(f).is_file(), "{f}");
    }
    let loaded = SceneGraph4D::load(&cfg.output.join(GRAPH_FILE)).unwrap();
    assert_eq!(loaded, replay.graph);
    let csv = std::fs::read_to_string(cfg.output.join(WINDOWS_CSV)).unwrap();
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn config_paths_resolve_against_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    generate(&SceneSpec::two_rooms()).unwrap().write_to(&dir.path().join("scene")).unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "seed = 3\ninput = \"scene/stream.jsonl\"\n").unwrap();
    let cfg = RunConfig::load(&path).unwrap();
    assert_eq!(cfg.input.as_deref(), Some(dir.path().join("scene/stream.jsonl").as_path()));
    assert_eq!(run(&cfg).graph.objects.len(), 10);
}

#[test]
fn drop_oldest_keeps_stats_consistent() {
    let mut cfg = RunConfig::default();
    cfg.queue.capacity = 1;
    cfg.queue.overflow = OverflowPolicy::DropOldest;
    cfg.describer.mock_service_s = 0.002;
    let out = run(&cfg);
    out.stats.check_consistency().unwrap();
    let flagged = out.stats.windows.iter().filter(|w| w.dropped).count() as u64;
    assert_eq!(flagged, out.stats.dropped_windows);
    assert_eq!(out.stats.windows.len(), 12);
}

#[test]
fn final_reconcile_alone_reaches_the_same_objects() {
    let mut cfg = RunConfig::default();
    cfg.reconcile_each_window = false;
    let out = run(&cfg);
    assert_eq!(out.graph.objects.len(), 10);
    assert_eq!(out.graph.regions.len(), 2);
}

#[test]
fn handle_receives_the_final_graph() {
    let handle = GraphHandle::default();
    let out = run_config_input(&RunConfig::default(), Some(handle.clone())).unwrap();
    assert_eq!(*handle.snapshot(), out.graph);
}

#[test]
fn stats_report_the_run() {
    let out = run(&RunConfig::default());
    let s = &out.stats;
    assert_eq!(s.objects, 10);
    assert_eq!(s.regions, 2);
    assert!(s.ground_records > 0);
    assert_eq!(s.backend_calls as usize, s.windows.iter().map(|w| w.batch_sizes.len()).sum::<usize>());
    assert!(s.windows.iter().all(|w| w.k_star >= 1 && w.selected_frames <= w.k_star + 1));
    let json: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
    assert_eq!(json["frames"], 600);
    assert!(s.table().contains("frames/s"));
}
