//! Robot-box convolution of a 3D occupancy grid.
//!
//! A column `(x, y)` is traversable when, at some height `z`, the cell below
//! the column center is occupied (the ground) and every cell of the robot
//! box standing on it is free. The box covers `2*rx+1 × 2*ry+1` columns
//! centered on `(x, y)` and `hz` layers starting at `z`. A candidate height
//! whose outcome hinges on unknown cells is unknown; otherwise it is
//! blocked. The column takes the lowest traversable height, else unknown if
//! any height is unknown, else nontraversable. Cells outside the grid are
//! unknown.
//!
//! Box counts come from 3D prefix sums, so the whole field costs
//! `O(nx * ny * nz)`.

use sg4d_core::{CellState, OccupancySnapshot};

use crate::field::{TravState, TraversabilityField};
use crate::PlacesError;

/// Robot bounding box in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RobotBox {
    pub rx: usize,
    pub ry: usize,
    pub hz: usize,
}

impl RobotBox {
    /// Converts a metric box (full sizes) to cells on a grid of `resolution`.
    pub fn from_meters(box_m: [f64; 3], resolution: f64) -> Result<Self, PlacesError> {
        if box_m.iter().any(|&s| !(s >= resolution)) {
            return Err(PlacesError::BoxTooSmall { box_m, resolution });
        }
        let half_cells = |s: f64| ((s / (2.0 * resolution)) + 1e-9).floor() as usize;
        Ok(Self {
            rx: half_cells(box_m[0]),
            ry: half_cells(box_m[1]),
            hz: ((box_m[2] / resolution) - 1e-9).ceil().max(1.0) as usize,
        })
    }
}

/// Inclusive-exclusive 3D prefix sums over a per-cell indicator.
struct Prefix {
    dims: [usize; 3],
    sums: Vec<u32>,
}

impl Prefix {
    fn new(occ: &OccupancySnapshot, pred: impl Fn(CellState) -> bool) -> Self {
        let [nx, ny, nz] = occ.dims;
        let (sx, sy) = (nx + 1, ny + 1);
        let mut sums = vec![0u32; sx * sy * (nz + 1)];
        let at = |x: usize, y: usize, z: usize| x + sx * (y + sy * z);
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    let v = pred(occ.get(x, y, z)) as u32;
                    sums[at(x + 1, y + 1, z + 1)] = v
                        + sums[at(x, y + 1, z + 1)]
                        + sums[at(x + 1, y, z + 1)]
                        + sums[at(x + 1, y + 1, z)]
                        - sums[at(x, y, z + 1)]
                        - sums[at(x, y + 1, z)]
                        - sums[at(x + 1, y, z)]
                        + sums[at(x, y, z)];
                }
            }
        }
        Self { dims: occ.dims, sums }
    }

    /// Count over the half-open box `[lo, hi)` (already clipped).
    fn count(&self, lo: [usize; 3], hi: [usize; 3]) -> u32 {
        let (sx, sy) = (self.dims[0] + 1, self.dims[1] + 1);
        let at = |x: usize, y: usize, z: usize| x + sx * (y + sy * z);
        let [x0, y0, z0] = lo;
        let [x1, y1, z1] = hi;
        (self.sums[at(x1, y1, z1)] + self.sums[at(x0, y0, z1)] + self.sums[at(x0, y1, z0)] + self.sums[at(x1, y0, z0)])
            - (self.sums[at(x0, y1, z1)] + self.sums[at(x1, y0, z1)] + self.sums[at(x1, y1, z0)] + self.sums[at(x0, y0, z0)])
    }
}

pub fn traversability(occ: &OccupancySnapshot, robot_box_m: [f64; 3]) -> Result<TraversabilityField, PlacesError> {
    let rb = RobotBox::from_meters(robot_box_m, occ.resolution)?;
    Ok(traversability_cells(occ, rb))
}

pub(crate) fn traversability_cells(occ: &OccupancySnapshot, rb: RobotBox) -> TraversabilityField {
    let [nx, ny, nz] = occ.dims;
    let occupied = Prefix::new(occ, |c| c == CellState::Occupied);
    let unknown = Prefix::new(occ, |c| c == CellState::Unknown);
    let box_volume = ((2 * rb.rx + 1) * (2 * rb.ry + 1) * rb.hz) as u32;

    let mut cells = Vec::with_capacity(nx * ny);
    let mut ground_z = Vec::with_capacity(nx * ny);
    for y in 0..ny {
        for x in 0..nx {
            let lo_x = x.saturating_sub(rb.rx);
            let hi_x = (x + rb.rx + 1).min(nx);
            let lo_y = y.saturating_sub(rb.ry);
            let hi_y = (y + rb.ry + 1).min(ny);
            let mut state = TravState::Nontraversable;
            let mut ground = None;
            for z in 0..nz {
                let support = if z == 0 { CellState::Unknown } else { occ.get(x, y, z - 1) };
                let hi_z = (z + rb.hz).min(nz);
                let lo = [lo_x, lo_y, z];
                let hi = [hi_x, hi_y, hi_z];
                let inside = ((hi_x - lo_x) * (hi_y - lo_y) * (hi_z - z)) as u32;
                let occ_n = occupied.count(lo, hi);
                let unk_n = unknown.count(lo, hi) + (box_volume - inside);
                let candidate = if occ_n > 0 || support == CellState::Free {
                    TravState::Nontraversable
                } else if unk_n > 0 || support == CellState::Unknown {
                    TravState::Unknown
                } else {
                    TravState::Traversable
                };
                match candidate {
                    TravState::Traversable => {
                        state = TravState::Traversable;
                        ground = Some(occ.origin[2] + z as f64 * occ.resolution);
                        break;
                    }
                    TravState::Unknown => state = TravState::Unknown,
                    TravState::Nontraversable => {}
                }
            }
            cells.push(state);
            ground_z.push(ground);
        }
    }
    TraversabilityField {
        origin: [occ.origin[0], occ.origin[1]],
        resolution: occ.resolution,
        dims: [nx, ny],
        cells,
        ground_z,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room(nx: usize, ny: usize, nz: usize) -> OccupancySnapshot {
        let mut occ = OccupancySnapshot::filled([0.0, 0.0, -0.1], 0.1, [nx, ny, nz], CellState::Free).unwrap();
        for y in 0..ny {
            for x in 0..nx {
                occ.set(x, y, 0, CellState::Occupied);
            }
        }
        occ
    }

    #[test]
    fn flat_floor_is_traversable_inside() {
        let occ = room(12, 10, 8);
        let f = traversability(&occ, [0.3, 0.3, 0.5]).unwrap();
        // footprint radius 1: the outer ring pokes outside the grid
        for y in 0..10 {
            for x in 0..12 {
                let interior = (1..11).contains(&x) && (1..9).contains(&y);
                let expect = if interior { TravState::Traversable } else { TravState::Unknown };
                assert_eq!(f.get(x, y), expect, "({x},{y})");
                if interior {
                    assert!((f.ground_z[f.index(x, y)].unwrap() - 0.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn wall_is_dilated_by_the_footprint() {
        let mut occ = room(15, 9, 8);
        for y in 0..9 {
            for z in 1..8 {
                occ.set(7, y, z, CellState::Occupied);
            }
        }
        let f = traversability(&occ, [0.5, 0.3, 0.5]).unwrap();
        // rx = 2: columns 5..=9 see the wall
        for x in 5..=9 {
            assert_eq!(f.get(x, 4), TravState::Nontraversable, "x={x}");
        }
        assert_eq!(f.get(4, 4), TravState::Traversable);
        assert_eq!(f.get(10, 4), TravState::Traversable);
    }

    #[test]
    fn unknown_floor_is_unknown() {
        let mut occ = room(7, 7, 6);
        occ.set(3, 3, 0, CellState::Unknown);
        let f = traversability(&occ, [0.1, 0.1, 0.3]).unwrap();
        assert_eq!(f.get(3, 3), TravState::Unknown);
        assert_eq!(f.get(2, 3), TravState::Traversable);
    }

    #[test]
    fn box_smaller_than_a_cell_is_rejected() {
        let occ = room(3, 3, 3);
        assert!(matches!(traversability(&occ, [0.05, 0.3, 0.3]), Err(PlacesError::BoxTooSmall { .. })));
    }

    #[test]
    fn robot_box_cells() {
        assert_eq!(RobotBox::from_meters([0.5, 0.3, 0.5], 0.1).unwrap(), RobotBox { rx: 2, ry: 1, hz: 5 });
        assert_eq!(RobotBox::from_meters([0.1, 0.1, 0.1], 0.1).unwrap(), RobotBox { rx: 0, ry: 0, hz: 1 });
    }
}
