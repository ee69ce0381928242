//! Region clustering over the places graph.
//!
//! Edges are weighted by the cosine distance between the two places'
//! features (zero when either place is undescribed) and visited in
//! ascending order. An edge joins its two clusters unless the mean pairwise
//! cosine distance over the described members of the union would exceed
//! `theta`. For unit features summing to `S` over `k` members that mean is
//! `1 - (|S|^2 - k) / (k (k - 1))`. Clusters smaller than `min_area_m2`
//! (isolated patches such as furniture tops) are left out. Objects then
//! join the region of the nearest place that belongs to one.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sg4d_core::description::{cosine_distance, dot};
use sg4d_core::geom::{dist, Vec3};
use sg4d_core::Timestamp;

use crate::graph::SceneGraph4D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionParams {
    pub theta: f64,
    /// Clusters with less place area than this (square meters) form no
    /// region, unless no cluster reaches it.
    pub min_area_m2: f64,
}

impl Default for RegionParams {
    fn default() -> Self {
        Self { theta: 0.3, min_area_m2: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisitPoint {
    pub t: Timestamp,
    pub position: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub entry: VisitPoint,
    pub exit: VisitPoint,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub region_id: u64,
    /// Set for the catch-all region used when there are no places.
    pub unassigned: bool,
    pub place_ids: BTreeSet<u64>,
    pub object_ids: BTreeSet<u64>,
    pub summary: String,
    /// Sampled object ids, in sampling order.
    pub exemplar_objects: Vec<u64>,
    pub exemplar_features: Vec<Vec<f64>>,
    pub visits: Vec<Visit>,
}

struct Cluster {
    sum: Vec<f64>,
    described: usize,
}

impl Cluster {
    fn mean_pairwise_distance(sum: &[f64], k: usize) -> f64 {
        if k < 2 {
            return 0.0;
        }
        let k = k as f64;
        1.0 - (dot(sum, sum) - k) / (k * (k - 1.0))
    }
}

/// Replaces the graph's regions. Summaries and visits start empty.
pub fn cluster_regions(graph: &mut SceneGraph4D, params: &RegionParams) {
    graph.regions.clear();
    if graph.places.nodes.is_empty() {
        let region = Region {
            region_id: 0,
            unassigned: true,
            object_ids: graph.objects.keys().copied().collect(),
            ..Region::default()
        };
        graph.regions.insert(0, region);
        return;
    }

    let mut ids: Vec<u64> = graph.places.nodes.iter().map(|n| n.id).collect();
    ids.sort_unstable();
    let index: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let feature = |id: u64| graph.places.node(id).and_then(|n| n.description.as_ref()).map(|d| d.feature.as_slice());
    let dim = ids.iter().find_map(|&id| feature(id)).map_or(0, <[f64]>::len);

    let mut parent: Vec<usize> = (0..ids.len()).collect();
    let mut clusters: Vec<Cluster> = ids
        .iter()
        .map(|&id| match feature(id) {
            Some(f) => Cluster { sum: f.to_vec(), described: 1 },
            None => Cluster { sum: vec![0.0; dim], described: 0 },
        })
        .collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }

    let mut edges: Vec<(f64, u64, u64)> = graph
        .places
        .edges
        .iter()
        .filter(|(a, b)| index.contains_key(a) && index.contains_key(b))
        .map(|&(a, b)| {
            let w = match (feature(a), feature(b)) {
                (Some(fa), Some(fb)) => cosine_distance(fa, fb),
                _ => 0.0,
            };
            (w, a, b)
        })
        .collect();
    edges.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    for (_, a, b) in edges {
        let (ra, rb) = (find(&mut parent, index[&a]), find(&mut parent, index[&b]));
        if ra == rb {
            continue;
        }
        let sum: Vec<f64> = clusters[ra].sum.iter().zip(&clusters[rb].sum).map(|(x, y)| x + y).collect();
        let k = clusters[ra].described + clusters[rb].described;
        if Cluster::mean_pairwise_distance(&sum, k) > params.theta + 1e-12 {
            continue;
        }
        let (keep, drop) = (ra.min(rb), ra.max(rb));
        parent[drop] = keep;
        clusters[keep] = Cluster { sum, described: k };
    }

    let mut members: BTreeMap<usize, BTreeSet<u64>> = BTreeMap::new();
    for (i, &id) in ids.iter().enumerate() {
        let r = find(&mut parent, i);
        members.entry(r).or_default().insert(id);
    }
    let area = |places: &BTreeSet<u64>| -> f64 {
        places.iter().filter_map(|&id| graph.places.node(id)).map(|n| 4.0 * n.half_extent[0] * n.half_extent[1]).sum()
    };
    let mut kept: Vec<BTreeSet<u64>> = members.into_values().collect();
    if kept.iter().any(|m| area(m) >= params.min_area_m2 - 1e-9) {
        kept.retain(|m| area(m) >= params.min_area_m2 - 1e-9);
    }
    kept.sort_by_key(|m| m.first().copied());
    // regions numbered by their smallest place id
    let mut place_region: BTreeMap<u64, u64> = BTreeMap::new();
    for (rid, places) in kept.into_iter().enumerate() {
        for p in &places {
            place_region.insert(*p, rid as u64);
        }
        graph.regions.insert(rid as u64, Region { region_id: rid as u64, place_ids: places, ..Region::default() });
    }

    let object_regions: Vec<(u64, u64)> = graph
        .objects
        .values()
        .filter_map(|o| nearest_place(graph, &place_region, o.latest_centroid()).map(|p| (o.node_id, place_region[&p])))
        .collect();
    for (oid, rid) in object_regions {
        graph.regions.get_mut(&rid).expect("region exists").object_ids.insert(oid);
    }
}

/// Region-owned place with the nearest 3D centroid; ties go to the lower id.
fn nearest_place(graph: &SceneGraph4D, place_region: &BTreeMap<u64, u64>, p: Vec3) -> Option<u64> {
    graph
        .places
        .nodes
        .iter()
        .filter(|n| place_region.contains_key(&n.id))
        .map(|n| (dist(n.centroid, p), n.id))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, id)| id)
}
