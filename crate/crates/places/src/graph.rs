use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sg4d_core::DescriptionRecord;

use crate::field::{TravState, TraversabilityField};
use crate::tessellate::{side_labels, tessellate, PlaceRect, Side};
use crate::PlacesError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceNode {
    pub id: u64,
    pub rect: PlaceRect,
    /// Rectangle center in world xy at the mean ground height.
    pub centroid: [f64; 3],
    /// Metric half sizes of the rectangle.
    pub half_extent: [f64; 2],
    pub sides: [TravState; 4],
    pub description: Option<DescriptionRecord>,
}

impl PlaceNode {
    pub fn is_described(&self) -> bool {
        self.description.is_some()
    }

    /// Whether world xy falls on this place's footprint.
    pub fn contains_xy(&self, xy: [f64; 2]) -> bool {
        (xy[0] - self.centroid[0]).abs() <= self.half_extent[0] + 1e-9
            && (xy[1] - self.centroid[1]).abs() <= self.half_extent[1] + 1e-9
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlacesGraph {
    pub nodes: Vec<PlaceNode>,
    /// Undirected edges as `(lo, hi)` id pairs.
    pub edges: BTreeSet<(u64, u64)>,
}

impl PlacesGraph {
    pub fn node(&self, id: u64) -> Option<&PlaceNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn neighbors(&self, id: u64) -> Vec<u64> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == id {
                    Some(b)
                } else if b == id {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Connected components, each sorted, ordered by smallest id.
    pub fn components(&self) -> Vec<Vec<u64>> {
        let mut parent: BTreeMap<u64, u64> = self.nodes.iter().map(|n| (n.id, n.id)).collect();
        fn find(p: &mut BTreeMap<u64, u64>, x: u64) -> u64 {
            let mut r = x;
            while p[&r] != r {
                r = p[&r];
            }
            let mut c = x;
            while p[&c] != r {
                let next = p[&c];
                p.insert(c, r);
                c = next;
            }
            r
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent.insert(ra.max(rb), ra.min(rb));
            }
        }
        let mut groups: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        let ids: Vec<u64> = parent.keys().copied().collect();
        for id in ids {
            let r = find(&mut parent, id);
            groups.entry(r).or_default().push(id);
        }
        groups.into_values().collect()
    }
}

/// Tessellates the field and connects rectangles that share a traversable
/// boundary. Node ids are tessellation order starting at `first_id`.
pub fn build_places_graph(
    field: &TraversabilityField,
    max_side_m: f64,
    first_id: u64,
) -> Result<PlacesGraph, PlacesError> {
    let rects = tessellate(field, max_side_m)?;
    let [nx, _] = field.dims;
    let res = field.resolution;
    let mut owner = vec![usize::MAX; field.cells.len()];
    for (i, r) in rects.iter().enumerate() {
        for (x, y) in r.cells() {
            owner[x + nx * y] = i;
        }
    }
    let sides: Vec<[TravState; 4]> = rects.iter().map(|r| side_labels(field, r)).collect();
    let nodes = rects
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let zs: Vec<f64> = r.cells().filter_map(|(x, y)| field.ground_z[field.index(x, y)]).collect();
            let z = if zs.is_empty() { 0.0 } else { zs.iter().sum::<f64>() / zs.len() as f64 };
            PlaceNode {
                id: first_id + i as u64,
                rect: *r,
                centroid: [
                    field.origin[0] + (r.x0 + r.x1) as f64 * 0.5 * res,
                    field.origin[1] + (r.y0 + r.y1) as f64 * 0.5 * res,
                    z,
                ],
                half_extent: [r.width() as f64 * 0.5 * res, r.height() as f64 * 0.5 * res],
                sides: sides[i],
                description: None,
            }
        })
        .collect();
    let side_idx = |s: Side| Side::ALL.iter().position(|t| *t == s).unwrap();
    let mut edges = BTreeSet::new();
    for (i, r) in rects.iter().enumerate() {
        for side in [Side::XMax, Side::YMax] {
            if sides[i][side_idx(side)] != TravState::Traversable {
                continue;
            }
            for (x, y) in r.outside(side) {
                if x < 0 || y < 0 || x as usize >= field.dims[0] || y as usize >= field.dims[1] {
                    continue;
                }
                let j = owner[x as usize + nx * y as usize];
                if j == usize::MAX || j == i || sides[j][side_idx(side.opposite())] != TravState::Traversable {
                    continue;
                }
                let (a, b) = (first_id + i as u64, first_id + j as u64);
                edges.insert((a.min(b), a.max(b)));
            }
        }
    }
    Ok(PlacesGraph { nodes, edges })
}
