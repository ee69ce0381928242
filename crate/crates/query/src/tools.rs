use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sg4d_core::description::cosine;
use sg4d_core::geom::{dist, Vec3};
use sg4d_core::Interval;
use sg4d_scenegraph::{ObjectNode, SceneGraph4D, Visit};

use crate::QueryError;

pub const DEFAULT_TOP_N: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedFragment {
    pub node_id: u64,
    /// Latest description.
    pub description: String,
    /// Latest centroid.
    pub position: Vec3,
    pub observation_timeline: Vec<Interval>,
    /// Cosine similarity for searches, distance in meters for radius queries.
    pub score: f64,
}

impl RetrievedFragment {
    fn new(node: &ObjectNode, score: f64) -> Self {
        Self {
            node_id: node.node_id,
            description: node.latest_description().to_string(),
            position: node.latest_centroid(),
            observation_timeline: node.timeline(),
            score,
        }
    }
}

fn check_dim(graph: &SceneGraph4D, query: &[f64]) -> Result<(), QueryError> {
    match graph.objects.values().next() {
        Some(n) if n.feature.len() != query.len() => Err(QueryError::Dimension { got: query.len(), expected: n.feature.len() }),
        _ => Ok(()),
    }
}

fn ranked<'a>(nodes: impl Iterator<Item = &'a ObjectNode>, query: &[f64], n: usize) -> Vec<RetrievedFragment> {
    let mut scored: Vec<(f64, &ObjectNode)> = nodes.map(|o| (cosine(&o.feature, query).clamp(-1.0, 1.0), o)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.node_id.cmp(&b.1.node_id)));
    scored.into_iter().take(n).map(|(s, o)| RetrievedFragment::new(o, s)).collect()
}

/// Top `n` objects by cosine similarity, ties by node id.
pub fn semantic_search(graph: &SceneGraph4D, query: &[f64], n: usize) -> Result<Vec<RetrievedFragment>, QueryError> {
    check_dim(graph, query)?;
    Ok(ranked(graph.objects.values(), query, n))
}

/// Objects whose latest centroid lies within `radius` of `position`,
/// nearest first.
pub fn fragments_in_radius(graph: &SceneGraph4D, position: Vec3, radius: f64) -> Result<Vec<RetrievedFragment>, QueryError> {
    if !(radius > 0.0) {
        return Err(QueryError::BadRadius(radius));
    }
    let mut hits: Vec<(f64, &ObjectNode)> = graph
        .objects
        .values()
        .map(|o| (dist(o.latest_centroid(), position), o))
        .filter(|(d, _)| *d <= radius)
        .collect();
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.node_id.cmp(&b.1.node_id)));
    Ok(hits.into_iter().map(|(d, o)| RetrievedFragment::new(o, d)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionInfo {
    pub region_id: u64,
    pub summary: String,
    pub unassigned: bool,
    pub place_count: usize,
    pub object_ids: BTreeSet<u64>,
    pub visits: Vec<Visit>,
}

pub fn region_information(graph: &SceneGraph4D) -> Vec<RegionInfo> {
    graph
        .regions
        .values()
        .map(|r| {
            let mut visits = r.visits.clone();
            visits.sort_by(|a, b| a.entry.t.0.total_cmp(&b.entry.t.0));
            RegionInfo {
                region_id: r.region_id,
                summary: r.summary.clone(),
                unassigned: r.unassigned,
                place_count: r.place_ids.len(),
                object_ids: r.object_ids.clone(),
                visits,
            }
        })
        .collect()
}

/// Semantic search restricted to one region's objects.
pub fn objects_in_region(
    graph: &SceneGraph4D,
    region_id: u64,
    query: &[f64],
    n: usize,
) -> Result<Vec<RetrievedFragment>, QueryError> {
    let region = graph.regions.get(&region_id).ok_or(QueryError::UnknownRegion(region_id))?;
    check_dim(graph, query)?;
    Ok(ranked(region.object_ids.iter().filter_map(|id| graph.objects.get(id)), query, n))
}
