use crate::graph::SceneGraph4D;
use crate::regions::{Visit, VisitPoint};

/// Nearest place in xy that belongs to a region, with that region; ties go
/// to the lower place id.
fn nearest_owned_place(graph: &SceneGraph4D, xy: [f64; 2]) -> Option<(u64, u64)> {
    graph
        .regions
        .values()
        .flat_map(|r| r.place_ids.iter().map(move |&p| (p, r.region_id)))
        .filter_map(|(p, rid)| {
            let n = graph.places.node(p)?;
            Some(((n.centroid[0] - xy[0]).hypot(n.centroid[1] - xy[1]), p, rid))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, p, rid)| (p, rid))
}

/// Rebuilds every region's visits from the agent poses. Each pose belongs
/// to the region owning the nearest region-owned place in xy (the catch-all
/// region when there are no places); runs of poses in one region form one
/// visit.
pub fn compute_region_visits(graph: &mut SceneGraph4D) {
    for r in graph.regions.values_mut() {
        r.visits.clear();
    }
    let fallback = graph.regions.values().find(|r| r.unassigned).map(|r| r.region_id);
    let mut current: Option<(u64, Visit)> = None;
    let mut done: Vec<(u64, Visit)> = Vec::new();
    for p in &graph.agent_poses {
        let pos = p.pose.position;
        let region = match nearest_owned_place(graph, [pos[0], pos[1]]) {
            Some((_, rid)) => Some(rid),
            None => fallback,
        };
        let Some(rid) = region else { continue };
        let point = VisitPoint { t: p.t, position: pos };
        match current.as_mut() {
            Some((r, v)) if *r == rid => v.exit = point,
            _ => {
                done.extend(current.take());
                current = Some((rid, Visit { entry: point, exit: point }));
            }
        }
    }
    done.extend(current);
    for (rid, v) in done {
        graph.regions.get_mut(&rid).expect("region looked up above").visits.push(v);
    }
}
