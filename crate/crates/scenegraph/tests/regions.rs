mod common;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use common::{feature, place, record, track};
use proptest::prelude::*;
use sg4d_core::description::cosine_distance;
use sg4d_core::{Pose, Timestamp};
use sg4d_places::PlacesGraph;
use sg4d_scenegraph::{
    cluster_regions, compute_region_visits, farthest_point_sampling, summarize_regions, GraphHandle, RegionParams,
    SceneGraph4D, Summarizer,
};

/// A row of places along x; places left of `split` get label 0, the rest label 4.
fn two_rooms(n: usize, split: usize) -> SceneGraph4D {
    let mut g = SceneGraph4D::new();
    let nodes = (0..n)
        .map(|i| {
            let (text, k) = if i < split { ("a wooden floor", 0) } else { ("a tiled floor", 4) };
            place(i as u64, [i as f64 * 2.0 + 1.0, 1.0], Some((text, feature(k, 0.01 * i as f64))))
        })
        .collect();
    let edges = (1..n as u64).map(|i| (i - 1, i)).collect();
    g.integrate_places(0, PlacesGraph { nodes, edges });
    g
}

#[test]
fn two_labels_give_two_regions() {
    let mut g = two_rooms(8, 4);
    g.upsert_fragment(&track(1, 1.0, [2.0, 1.0, 0.5]), record("a sofa", feature(1, 0.0), 0.0, 1.0)).unwrap();
    g.upsert_fragment(&track(2, 1.0, [14.0, 1.0, 0.5]), record("a sink", feature(5, 0.0), 0.0, 1.0)).unwrap();
    cluster_regions(&mut g, &RegionParams::default());
    assert_eq!(g.regions.len(), 2);
    assert_eq!(g.regions[&0].place_ids, (0..4).collect());
    assert_eq!(g.regions[&1].place_ids, (4..8).collect());
    assert_eq!(g.region_of_object(0), Some(0));
    assert_eq!(g.region_of_object(1), Some(1));
}

#[test]
fn small_isolated_patches_form_no_region() {
    let mut g = two_rooms(4, 4);
    let mut top = place(100, [3.0, 1.0], None);
    top.centroid[2] = 0.8;
    top.half_extent = [0.2, 0.2];
    g.integrate_places(1, PlacesGraph { nodes: vec![top], edges: BTreeSet::new() });
    // the object sits on the patch but joins the room around it
    g.upsert_fragment(&track(1, 1.0, [3.0, 1.0, 0.6]), record("a table", feature(1, 0.0), 0.0, 1.0)).unwrap();
    g.agent_poses.push(sg4d_scenegraph::AgentPose {
        t: sg4d_core::Timestamp(0.0),
        pose: sg4d_core::Pose::from_yaw([3.0, 1.0, 1.2], 0.0),
    });
    cluster_regions(&mut g, &RegionParams::default());
    compute_region_visits(&mut g);
    assert_eq!(g.regions.len(), 1);
    assert_eq!(g.region_of_place(4), None);
    assert_eq!(g.region_of_object(0), Some(0));
    assert_eq!(g.regions[&0].visits.len(), 1);
}

#[test]
fn single_place_holds_every_object() {
    let mut g = SceneGraph4D::new();
    g.integrate_places(0, PlacesGraph { nodes: vec![place(0, [0.0, 0.0], None)], edges: BTreeSet::new() });
    for i in 0..3 {
        g.upsert_fragment(&track(i, 1.0, [i as f64 * 5.0, 0.0, 0.0]), record("x", feature(i as usize, 0.0), 0.0, 1.0))
            .unwrap();
    }
    cluster_regions(&mut g, &RegionParams::default());
    assert_eq!(g.regions.len(), 1);
    assert_eq!(g.regions[&0].object_ids.len(), 3);
}

#[test]
fn identical_features_collapse_to_one_region() {
    let mut g = two_rooms(6, 6);
    for n in g.places.nodes.iter_mut() {
        n.description = Some(record("a floor", feature(0, 0.0), 0.0, 1.0));
    }
    cluster_regions(&mut g, &RegionParams::default());
    assert_eq!(g.regions.len(), 1);
}

#[test]
fn no_places_uses_the_unassigned_region() {
    let mut g = SceneGraph4D::new();
    g.upsert_fragment(&track(1, 1.0, [0.0; 3]), record("a cup", feature(0, 0.0), 0.0, 1.0)).unwrap();
    cluster_regions(&mut g, &RegionParams::default());
    assert_eq!(g.regions.len(), 1);
    assert!(g.regions[&0].unassigned);
    assert_eq!(g.region_of_object(0), Some(0));
}

fn walk(g: &mut SceneGraph4D, xs: &[f64]) {
    for (i, &x) in xs.iter().enumerate() {
        g.record_agent_pose(Timestamp(i as f64 * 0.1), Pose::from_yaw([x, 1.0, 0.0], 0.0)).unwrap();
    }
}

#[test]
fn crossing_once_gives_one_visit_each() {
    let mut g = two_rooms(8, 4);
    cluster_regions(&mut g, &RegionParams::default());
    let xs: Vec<f64> = (0..=150).map(|i| 0.5 + i as f64 * 0.1).collect();
    walk(&mut g, &xs);
    compute_region_visits(&mut g);
    let (a, b) = (&g.regions[&0].visits, &g.regions[&1].visits);
    assert_eq!((a.len(), b.len()), (1, 1));
    assert!((b[0].entry.t.0 - a[0].exit.t.0 - 0.1).abs() < 1e-9);
    // boundary between place 3 (x=7) and place 4 (x=9) is x=8
    assert!((a[0].exit.position[0] - 8.0).abs() <= 0.1 + 1e-9);
}

#[test]
fn staying_put_is_one_visit() {
    let mut g = two_rooms(8, 4);
    cluster_regions(&mut g, &RegionParams::default());
    walk(&mut g, &[1.0, 2.0, 3.0, 2.0, 1.0]);
    compute_region_visits(&mut g);
    assert_eq!(g.regions[&0].visits.len(), 1);
    assert_eq!(g.regions[&0].visits[0].exit.t.0, 0.4);
    assert!(g.regions[&1].visits.is_empty());
}

#[test]
fn loop_visits_a_twice() {
    let mut g = two_rooms(8, 4);
    cluster_regions(&mut g, &RegionParams::default());
    let mut xs: Vec<f64> = (0..=140).map(|i| 1.0 + i as f64 * 0.1).collect();
    xs.extend((0..=140).map(|i| 15.0 - i as f64 * 0.1));
    walk(&mut g, &xs);
    compute_region_visits(&mut g);
    assert_eq!(g.regions[&0].visits.len(), 2);
    assert_eq!(g.regions[&1].visits.len(), 1);
}

#[test]
fn poses_must_be_time_ordered() {
    let mut g = SceneGraph4D::new();
    g.record_agent_pose(Timestamp(1.0), Pose::from_yaw([0.0; 3], 0.0)).unwrap();
    assert!(g.record_agent_pose(Timestamp(0.5), Pose::from_yaw([0.0; 3], 0.0)).is_err());
}

#[test]
fn fps_single_object_and_summary() {
    let mut g = two_rooms(2, 2);
    g.upsert_fragment(&track(1, 1.0, [1.0, 1.0, 0.0]), record("a red fire hydrant", feature(3, 0.0), 0.0, 1.0)).unwrap();
    cluster_regions(&mut g, &RegionParams::default());
    summarize_regions(&mut g, None);
    let r = &g.regions[&0];
    assert_eq!(r.exemplar_objects, vec![0]);
    assert!(r.summary.contains("a red fire hydrant"));
    assert!(r.summary.contains("a wooden floor"));
}

#[test]
fn fps_picks_one_exemplar_per_cluster() {
    let feats: Vec<Vec<f64>> = (0..12).map(|i| feature((i % 3) * 2, 0.02 * (i / 3) as f64)).collect();
    let refs: Vec<&[f64]> = feats.iter().map(Vec::as_slice).collect();
    let picks = farthest_point_sampling(&refs, 3);
    let clusters: BTreeSet<usize> = picks.iter().map(|i| i % 3).collect();
    assert_eq!(clusters.len(), 3);
    assert_eq!(picks, farthest_point_sampling(&refs, 3));
    assert_eq!(farthest_point_sampling(&refs, 1).len(), 1);
    assert_eq!(farthest_point_sampling(&refs, 50).len(), 12);
    assert!(farthest_point_sampling(&[], 5).is_empty());
}

struct Echo(usize);

impl Summarizer for Echo {
    fn summarize(&mut self, region_id: u64, texts: &[String]) -> Result<String, String> {
        self.0 += 1;
        if region_id == 1 {
            return Err("offline".into());
        }
        Ok(format!("hook: {}", texts.join(" & ")))
    }
}

#[test]
fn summarizer_hook_with_fallback() {
    let mut g = two_rooms(8, 4);
    g.upsert_fragment(&track(1, 1.0, [2.0, 1.0, 0.5]), record("a sofa", feature(1, 0.0), 0.0, 1.0)).unwrap();
    cluster_regions(&mut g, &RegionParams::default());
    let mut hook = Echo(0);
    summarize_regions(&mut g, Some(&mut hook));
    assert_eq!(hook.0, 2);
    assert_eq!(g.regions[&0].summary, "hook: a sofa");
    assert!(g.regions[&1].summary.starts_with("Region 1 with no objects"));
}

#[test]
fn snapshots_are_isolated_from_later_publishes() {
    let handle = GraphHandle::new(two_rooms(2, 1));
    let before = handle.snapshot();
    handle.publish(two_rooms(5, 1));
    assert_eq!(before.places.nodes.len(), 2);
    assert_eq!(handle.snapshot().places.nodes.len(), 5);
}

#[test]
fn persisted_graph_round_trips_byte_for_byte() {
    let mut g = two_rooms(8, 4);
    g.upsert_fragment(&track(1, 1.0, [2.0, 1.0, 0.5]), record("a sofa", feature(1, 0.3), 0.0, 1.0)).unwrap();
    g.upsert_fragment(&track(2, 1.0, [14.0, 1.0, 0.5]), record("a sink", feature(5, 0.1), 0.0, 1.0)).unwrap();
    walk(&mut g, &[1.0 / 3.0, 0.1 + 0.2, 15.0]);
    g.meta.insert("seed".into(), serde_json::json!(42));
    cluster_regions(&mut g, &RegionParams::default());
    summarize_regions(&mut g, None);
    compute_region_visits(&mut g);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sg4d.graph");
    g.save(&path).unwrap();
    let loaded = SceneGraph4D::load(&path).unwrap();
    assert_eq!(loaded, g);
    assert_eq!(loaded.to_bytes().unwrap(), std::fs::read(&path).unwrap());

    let tampered = String::from_utf8(g.to_bytes().unwrap()).unwrap().replace("sg4d.graph", "other");
    assert!(SceneGraph4D::from_bytes(tampered.as_bytes()).is_err());
}

fn connected(g: &SceneGraph4D, set: &BTreeSet<u64>) -> bool {
    let Some(&start) = set.iter().next() else { return true };
    let mut seen = BTreeSet::from([start]);
    let mut q = VecDeque::from([start]);
    while let Some(p) = q.pop_front() {
        for n in g.places.neighbors(p) {
            if set.contains(&n) && seen.insert(n) {
                q.push_back(n);
            }
        }
    }
    seen.len() == set.len()
}

proptest! {
    #[test]
    fn regions_partition_connected_places(
        labels in prop::collection::vec(prop::option::of(0usize..4), 1..30),
        extra in prop::collection::vec((0usize..30, 0usize..30), 0..20),
        objects in prop::collection::vec((0.0f64..60.0, 0.0f64..10.0), 0..15),
        theta in 0.0f64..1.0,
        min_area in 0.0f64..4.0,
    ) {
        let n = labels.len();
        let nodes = labels.iter().enumerate().map(|(i, l)| {
            place(i as u64, [(i % 10) as f64 * 2.0, (i / 10) as f64 * 2.0], l.map(|k| ("p", feature(k, 0.0))))
        }).collect();
        let mut edges: BTreeSet<(u64, u64)> = (1..n as u64).filter(|i| i % 3 != 0).map(|i| (i - 1, i)).collect();
        for (a, b) in extra {
            if a < n && b < n && a != b {
                edges.insert((a.min(b) as u64, a.max(b) as u64));
            }
        }
        let mut g = SceneGraph4D::new();
        g.integrate_places(0, PlacesGraph { nodes, edges });
        for (i, (x, y)) in objects.iter().enumerate() {
            g.upsert_fragment(&track(i as u64, 1.0, [*x, *y, 0.0]), record("o", feature(i, 0.0), 0.0, 1.0)).unwrap();
        }
        cluster_regions(&mut g, &RegionParams { theta, min_area_m2: min_area });

        let mut owner: BTreeMap<u64, u64> = BTreeMap::new();
        for r in g.regions.values() {
            prop_assert!(connected(&g, &r.place_ids));
            for p in &r.place_ids {
                prop_assert!(owner.insert(*p, r.region_id).is_none());
            }
            // cohesion bound over described members
            let feats: Vec<&Vec<f64>> = r.place_ids.iter()
                .filter_map(|p| g.places.node(*p).unwrap().description.as_ref().map(|d| &d.feature))
                .collect();
            if feats.len() >= 2 {
                let mut total = 0.0;
                let mut pairs = 0.0;
                for i in 0..feats.len() {
                    for j in i + 1..feats.len() {
                        total += cosine_distance(feats[i], feats[j]);
                        pairs += 1.0;
                    }
                }
                prop_assert!(total / pairs <= theta + 1e-9);
            }
        }
        // unit-area places: small clusters drop out only while some cluster is big enough
        let all_kept = owner.len() == n;
        for r in g.regions.values() {
            prop_assert!(all_kept || r.place_ids.len() as f64 >= min_area - 1e-9);
        }
        if min_area <= 1.0 {
            prop_assert!(all_kept);
        }
        for id in g.objects.keys() {
            prop_assert_eq!(g.regions.values().filter(|r| r.object_ids.contains(id)).count(), 1);
        }
    }

    #[test]
    fn fps_pair_is_the_farthest_pair(raw in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 2..50)) {
        let feats: Vec<Vec<f64>> = raw.into_iter()
            .filter_map(|v| sg4d_core::description::normalized(&v))
            .collect();
        prop_assume!(feats.len() >= 2);
        let refs: Vec<&[f64]> = feats.iter().map(Vec::as_slice).collect();
        let picks = farthest_point_sampling(&refs, 2);
        let mut best = f64::NEG_INFINITY;
        for i in 0..refs.len() {
            for j in i + 1..refs.len() {
                best = best.max(cosine_distance(refs[i], refs[j]));
            }
        }
        prop_assert_eq!(cosine_distance(refs[picks[0]], refs[picks[1]]), best);
    }
}
