use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sg4d_core::{DescriptionRecord, FragmentTrack, Pose, Timestamp};
use sg4d_places::PlacesGraph;

use crate::object::ObjectNode;
use crate::regions::Region;
use crate::SceneGraphError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentPose {
    pub t: Timestamp,
    pub pose: Pose,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph4D {
    pub objects: BTreeMap<u64, ObjectNode>,
    pub places: PlacesGraph,
    /// Occupancy snapshot each place was extracted from.
    pub place_sources: BTreeMap<u64, u64>,
    pub regions: BTreeMap<u64, Region>,
    pub agent_poses: Vec<AgentPose>,
    /// Which object node owns each track id, including merged tracks.
    pub track_owner: BTreeMap<u64, u64>,
    pub next_object_id: u64,
    pub next_place_id: u64,
    /// Free-form run metadata (embedding setup and the like).
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl SceneGraph4D {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one window's description of a track, creating the node on first
    /// sight. The window's last observation supplies the centroid sample.
    pub fn upsert_fragment(&mut self, track: &FragmentTrack, record: DescriptionRecord) -> Result<u64, SceneGraphError> {
        let latest = track.latest().ok_or(SceneGraphError::EmptyTrack(track.track_id))?;
        let (t, c, ext) = (latest.timestamp, latest.observation.centroid_3d, latest.observation.extent_3d);
        if let Some(&id) = self.track_owner.get(&track.track_id) {
            let node = self.objects.get_mut(&id).expect("track owner points at a live node");
            node.add_centroid(t, c);
            node.add_description(record);
            for (e, o) in node.extent.iter_mut().zip(ext) {
                *e = e.max(o);
            }
            if track.first_seen().0 < node.first_seen.0 {
                node.first_seen = track.first_seen();
            }
            if track.last_seen().0 > node.last_seen.0 {
                node.last_seen = track.last_seen();
            }
            return Ok(id);
        }
        let id = self.next_object_id;
        self.next_object_id += 1;
        let node = ObjectNode {
            node_id: id,
            track_ids: BTreeSet::from([track.track_id]),
            centroid_t: vec![(t, c)],
            extent: ext,
            feature: record.feature.clone(),
            history: vec![record],
            first_seen: track.first_seen(),
            last_seen: track.last_seen(),
        };
        self.objects.insert(id, node);
        self.track_owner.insert(track.track_id, id);
        Ok(id)
    }

    /// Adds the places extracted from one occupancy snapshot under fresh ids.
    pub fn integrate_places(&mut self, snapshot_id: u64, places: PlacesGraph) -> BTreeMap<u64, u64> {
        let remap: BTreeMap<u64, u64> = places
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id, self.next_place_id + i as u64))
            .collect();
        self.next_place_id += places.nodes.len() as u64;
        for mut n in places.nodes {
            n.id = remap[&n.id];
            self.place_sources.insert(n.id, snapshot_id);
            self.places.nodes.push(n);
        }
        for (a, b) in places.edges {
            let (a, b) = (remap[&a], remap[&b]);
            self.places.edges.insert((a.min(b), a.max(b)));
        }
        remap
    }

    pub fn record_agent_pose(&mut self, t: Timestamp, pose: Pose) -> Result<(), SceneGraphError> {
        if let Some(last) = self.agent_poses.last() {
            if t.0 < last.t.0 {
                return Err(SceneGraphError::PoseOrder { t: t.0, last: last.t.0 });
            }
        }
        self.agent_poses.push(AgentPose { t, pose });
        Ok(())
    }

    pub fn region_of_object(&self, object_id: u64) -> Option<u64> {
        self.regions.values().find(|r| r.object_ids.contains(&object_id)).map(|r| r.region_id)
    }

    pub fn region_of_place(&self, place_id: u64) -> Option<u64> {
        self.regions.values().find(|r| r.place_ids.contains(&place_id)).map(|r| r.region_id)
    }

    /// Place whose centroid is nearest in xy; ties go to the lower id.
    pub fn nearest_place_xy(&self, xy: [f64; 2]) -> Option<u64> {
        self.places
            .nodes
            .iter()
            .map(|p| {
                let d = (p.centroid[0] - xy[0]).hypot(p.centroid[1] - xy[1]);
                (d, p.id)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, id)| id)
    }
}
