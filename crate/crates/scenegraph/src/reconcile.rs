//! Merging of re-observed entities.
//!
//! Two objects merge when their temporally closest centroid samples lie
//! within `delta_geo` and their features have cosine similarity at least
//! `tau_feat`. Places from different snapshots merge on geometry alone.
//! Pairs are visited in id order, the lower id survives, and passes repeat
//! until one makes no merge.

use serde::{Deserialize, Serialize};
use sg4d_core::description::cosine;
use sg4d_core::geom::dist;

use crate::graph::SceneGraph4D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReconcileParams {
    pub delta_geo: f64,
    pub tau_feat: f64,
}

impl Default for ReconcileParams {
    fn default() -> Self {
        Self { delta_geo: 0.5, tau_feat: 0.9 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MergeReport {
    /// `(kept, absorbed)` object ids in merge order.
    pub object_merges: Vec<(u64, u64)>,
    pub place_merges: Vec<(u64, u64)>,
    pub passes: usize,
}

impl MergeReport {
    pub fn total(&self) -> usize {
        self.object_merges.len() + self.place_merges.len()
    }
}

pub fn reconcile(graph: &mut SceneGraph4D, params: &ReconcileParams) -> MergeReport {
    let mut report = MergeReport::default();
    loop {
        report.passes += 1;
        let merged = object_pass(graph, params, &mut report) + place_pass(graph, params, &mut report);
        if merged == 0 {
            break;
        }
    }
    report
}

fn object_pass(graph: &mut SceneGraph4D, params: &ReconcileParams, report: &mut MergeReport) -> usize {
    let ids: Vec<u64> = graph.objects.keys().copied().collect();
    let mut merged = 0;
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            let (Some(na), Some(nb)) = (graph.objects.get(&a), graph.objects.get(&b)) else {
                continue;
            };
            let close = na.temporal_distance(nb).is_some_and(|d| d <= params.delta_geo);
            if !close || cosine(&na.feature, &nb.feature) < params.tau_feat {
                continue;
            }
            let absorbed = graph.objects.remove(&b).expect("checked above");
            for t in &absorbed.track_ids {
                graph.track_owner.insert(*t, a);
            }
            graph.objects.get_mut(&a).expect("checked above").absorb(absorbed);
            for r in graph.regions.values_mut() {
                if r.object_ids.remove(&b) {
                    r.object_ids.insert(a);
                }
            }
            report.object_merges.push((a, b));
            merged += 1;
        }
    }
    merged
}

fn place_pass(graph: &mut SceneGraph4D, params: &ReconcileParams, report: &mut MergeReport) -> usize {
    let mut ids: Vec<u64> = graph.places.nodes.iter().map(|n| n.id).collect();
    ids.sort_unstable();
    let mut merged = 0;
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            let (Some(pa), Some(pb)) = (graph.places.node(a), graph.places.node(b)) else {
                continue;
            };
            if graph.place_sources.get(&a) == graph.place_sources.get(&b)
                || dist(pa.centroid, pb.centroid) > params.delta_geo
            {
                continue;
            }
            let pos = graph.places.nodes.iter().position(|n| n.id == b).expect("checked above");
            let absorbed = graph.places.nodes.remove(pos);
            if let Some(kept) = graph.places.nodes.iter_mut().find(|n| n.id == a) {
                if kept.description.is_none() {
                    kept.description = absorbed.description;
                }
            }
            graph.place_sources.remove(&b);
            let edges = std::mem::take(&mut graph.places.edges);
            graph.places.edges = edges
                .into_iter()
                .map(|(x, y)| (if x == b { a } else { x }, if y == b { a } else { y }))
                .filter(|(x, y)| x != y)
                .map(|(x, y)| (x.min(y), x.max(y)))
                .collect();
            for r in graph.regions.values_mut() {
                if r.place_ids.remove(&b) {
                    r.place_ids.insert(a);
                }
            }
            report.place_merges.push((a, b));
            merged += 1;
        }
    }
    merged
}
