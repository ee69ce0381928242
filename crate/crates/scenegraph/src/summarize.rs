use std::collections::BTreeMap;

use sg4d_core::description::{cosine, cosine_distance, mean_feature};

use crate::graph::SceneGraph4D;

/// Exemplars drawn per region.
pub const MAX_EXEMPLARS: usize = 5;

/// External region summarizer, e.g. a language model behind a socket.
pub trait Summarizer {
    fn summarize(&mut self, region_id: u64, texts: &[String]) -> Result<String, String>;
}

/// Farthest point sampling under cosine distance.
///
/// One point: the feature nearest the mean. Two or more: the farthest pair
/// (the one nearer the mean first), then repeatedly the feature whose
/// minimum distance to the chosen set is largest. Ties go to lower indices.
pub fn farthest_point_sampling(features: &[&[f64]], k: usize) -> Vec<usize> {
    let n = features.len();
    let k = k.min(n);
    if k == 0 {
        return Vec::new();
    }
    let mean = mean_feature(features.iter().copied());
    let to_mean = |i: usize| mean.as_deref().map_or(0.0, |m| cosine(features[i], m));
    if k == 1 {
        let best = (0..n).fold(0, |b, i| if to_mean(i) > to_mean(b) { i } else { b });
        return vec![best];
    }

    let mut pair = (0, 1);
    let mut far = f64::NEG_INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let d = cosine_distance(features[i], features[j]);
            if d > far {
                far = d;
                pair = (i, j);
            }
        }
    }
    let mut chosen = if to_mean(pair.1) > to_mean(pair.0) { vec![pair.1, pair.0] } else { vec![pair.0, pair.1] };
    let mut min_dist: Vec<f64> = (0..n)
        .map(|i| chosen.iter().map(|&c| cosine_distance(features[i], features[c])).fold(f64::INFINITY, f64::min))
        .collect();
    while chosen.len() < k {
        let next = (0..n)
            .filter(|i| !chosen.contains(i))
            .fold(None, |b: Option<usize>, i| match b {
                Some(b) if min_dist[b] >= min_dist[i] => Some(b),
                _ => Some(i),
            })
            .expect("k <= n leaves a candidate");
        chosen.push(next);
        for i in 0..n {
            min_dist[i] = min_dist[i].min(cosine_distance(features[i], features[next]));
        }
    }
    chosen
}

/// Fills every region's exemplars and summary. Without a hook, or when the
/// hook fails, the summary is a fixed template over the exemplar texts.
pub fn summarize_regions(graph: &mut SceneGraph4D, mut hook: Option<&mut dyn Summarizer>) {
    let region_ids: Vec<u64> = graph.regions.keys().copied().collect();
    for rid in region_ids {
        let region = &graph.regions[&rid];
        let objects: Vec<_> = region.object_ids.iter().filter_map(|id| graph.objects.get(id)).collect();
        let feats: Vec<&[f64]> = objects.iter().map(|o| o.feature.as_slice()).collect();
        let picks = farthest_point_sampling(&feats, MAX_EXEMPLARS);
        let exemplar_objects: Vec<u64> = picks.iter().map(|&i| objects[i].node_id).collect();
        let exemplar_features: Vec<Vec<f64>> = picks.iter().map(|&i| objects[i].feature.clone()).collect();
        let texts: Vec<String> = picks.iter().map(|&i| objects[i].latest_description().to_string()).collect();
        let ground = modal_place_text(graph, rid);

        let mut summary = None;
        if let Some(h) = hook.as_deref_mut() {
            match h.summarize(rid, &texts) {
                Ok(s) if !s.trim().is_empty() => summary = Some(s),
                Ok(_) => log::warn!("summarizer returned nothing for region {rid}"),
                Err(e) => log::warn!("summarizer failed for region {rid}: {e}"),
            }
        }
        let summary = summary.unwrap_or_else(|| template(rid, objects.len(), &texts, ground.as_deref()));
        let region = graph.regions.get_mut(&rid).expect("listed above");
        region.exemplar_objects = exemplar_objects;
        region.exemplar_features = exemplar_features;
        region.summary = summary;
    }
}

fn modal_place_text(graph: &SceneGraph4D, rid: u64) -> Option<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for pid in &graph.regions[&rid].place_ids {
        if let Some(d) = graph.places.node(*pid).and_then(|p| p.description.as_ref()) {
            *counts.entry(d.text.as_str()).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .fold(None, |b: Option<(&str, usize)>, (t, c)| match b {
            Some(b) if b.1 >= c => Some(b),
            _ => Some((t, c)),
        })
        .map(|(t, _)| t.to_string())
}

fn template(rid: u64, n_objects: usize, texts: &[String], ground: Option<&str>) -> String {
    let mut s = match n_objects {
        0 => format!("Region {rid} with no objects"),
        1 => format!("Region {rid} with 1 object: {}", texts.join("; ")),
        n => format!("Region {rid} with {n} objects, including: {}", texts.join("; ")),
    };
    if let Some(g) = ground {
        s.push_str(&format!(". Ground: {g}"));
    }
    s
}
