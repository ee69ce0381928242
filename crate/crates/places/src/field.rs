use serde::{Deserialize, Serialize};

use crate::PlacesError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TravState {
    Traversable,
    Unknown,
    Nontraversable,
}

/// 2D traversability over the xy-plane, x-fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraversabilityField {
    pub origin: [f64; 2],
    pub resolution: f64,
    pub dims: [usize; 2],
    pub cells: Vec<TravState>,
    /// Surface height where traversable.
    pub ground_z: Vec<Option<f64>>,
}

impl TraversabilityField {
    pub fn new(
        origin: [f64; 2],
        resolution: f64,
        dims: [usize; 2],
        cells: Vec<TravState>,
        ground_z: Vec<Option<f64>>,
    ) -> Result<Self, PlacesError> {
        let n = dims[0] * dims[1];
        if cells.len() != n || ground_z.len() != n {
            return Err(PlacesError::Shape(format!(
                "{} cells / {} heights for {}x{}",
                cells.len(),
                ground_z.len(),
                dims[0],
                dims[1]
            )));
        }
        Ok(Self { origin, resolution, dims, cells, ground_z })
    }

    /// Field with flat ground at `z = 0` under every traversable cell.
    pub fn from_states(resolution: f64, dims: [usize; 2], cells: Vec<TravState>) -> Result<Self, PlacesError> {
        let ground_z = cells.iter().map(|c| (*c == TravState::Traversable).then_some(0.0)).collect();
        Self::new([0.0, 0.0], resolution, dims, cells, ground_z)
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        x + self.dims[0] * y
    }

    pub fn get(&self, x: usize, y: usize) -> TravState {
        self.cells[self.index(x, y)]
    }

    /// Out-of-grid cells read as unknown.
    pub fn get_signed(&self, x: i64, y: i64) -> TravState {
        if x < 0 || y < 0 || x as usize >= self.dims[0] || y as usize >= self.dims[1] {
            TravState::Unknown
        } else {
            self.get(x as usize, y as usize)
        }
    }

    pub fn traversable_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == TravState::Traversable).count()
    }

    /// World xy of a cell center.
    pub fn cell_center(&self, x: usize, y: usize) -> [f64; 2] {
        [
            self.origin[0] + (x as f64 + 0.5) * self.resolution,
            self.origin[1] + (y as f64 + 0.5) * self.resolution,
        ]
    }

    /// Cell containing a world xy point, if inside the grid.
    pub fn cell_at(&self, xy: [f64; 2]) -> Option<(usize, usize)> {
        let fx = ((xy[0] - self.origin[0]) / self.resolution).floor();
        let fy = ((xy[1] - self.origin[1]) / self.resolution).floor();
        (fx >= 0.0 && fy >= 0.0 && (fx as usize) < self.dims[0] && (fy as usize) < self.dims[1])
            .then_some((fx as usize, fy as usize))
    }
}
