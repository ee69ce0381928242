//! Volumetric occupancy snapshots.
//!
//! Binary layout (little endian): `u32 nx, u32 ny, u32 nz, f64 resolution,
//! f64 origin_x, f64 origin_y, f64 origin_z`, followed by `nx*ny*nz` bytes in
//! x-fastest order (`idx = x + nx * (y + ny * z)`). Cell bytes: `0` unknown,
//! `1` free, `2` occupied.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;

const HEADER_LEN: usize = 3 * 4 + 4 * 8;

#[derive(Debug, Error)]
pub enum OccupancyError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("truncated header")]
    Truncated,
    #[error("cell array has {got} entries, dims require {expected}")]
    DimsMismatch { got: usize, expected: usize },
    #[error("resolution must be positive, got {0}")]
    BadResolution(f64),
    #[error("invalid cell byte {0}")]
    BadCell(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum CellState {
    Unknown = 0,
    Free = 1,
    Occupied = 2,
}

impl TryFrom<u8> for CellState {
    type Error = OccupancyError;

    fn try_from(b: u8) -> Result<Self, Self::Error> {
        match b {
            0 => Ok(CellState::Unknown),
            1 => Ok(CellState::Free),
            2 => Ok(CellState::Occupied),
            other => Err(OccupancyError::BadCell(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancySnapshot {
    pub origin: Vec3,
    pub resolution: f64,
    pub dims: [usize; 3],
    cells: Vec<CellState>,
}

impl OccupancySnapshot {
    pub fn new(
        origin: Vec3,
        resolution: f64,
        dims: [usize; 3],
        cells: Vec<CellState>,
    ) -> Result<Self, OccupancyError> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(OccupancyError::BadResolution(resolution));
        }
        let expected = dims[0] * dims[1] * dims[2];
        if cells.len() != expected {
            return Err(OccupancyError::DimsMismatch { got: cells.len(), expected });
        }
        Ok(Self { origin, resolution, dims, cells })
    }

    pub fn filled(origin: Vec3, resolution: f64, dims: [usize; 3], state: CellState) -> Result<Self, OccupancyError> {
        Self::new(origin, resolution, dims, vec![state; dims[0] * dims[1] * dims[2]])
    }

    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> CellState {
        self.cells[self.index(x, y, z)]
    }

    /// Signed lookup; anything outside the grid is unknown.
    pub fn get_signed(&self, x: i64, y: i64, z: i64) -> CellState {
        if x < 0 || y < 0 || z < 0 {
            return CellState::Unknown;
        }
        let (x, y, z) = (x as usize, y as usize, z as usize);
        if x >= self.dims[0] || y >= self.dims[1] || z >= self.dims[2] {
            return CellState::Unknown;
        }
        self.get(x, y, z)
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, state: CellState) {
        let i = self.index(x, y, z);
        self.cells[i] = state;
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), OccupancyError> {
        for d in self.dims {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        w.write_all(&self.resolution.to_le_bytes())?;
        for o in self.origin {
            w.write_all(&o.to_le_bytes())?;
        }
        let bytes: Vec<u8> = self.cells.iter().map(|&c| c as u8).collect();
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, OccupancyError> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => OccupancyError::Truncated,
            _ => OccupancyError::Io(e),
        })?;
        let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap()) as usize;
        let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let dims = [u32_at(0), u32_at(4), u32_at(8)];
        let resolution = f64_at(12);
        let origin = [f64_at(20), f64_at(28), f64_at(36)];
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        let cells = body.into_iter().map(CellState::try_from).collect::<Result<Vec<_>, _>>()?;
        Self::new(origin, resolution, dims, cells)
    }

    pub fn save(&self, path: &Path) -> Result<(), OccupancyError> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self, OccupancyError> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let mut occ = OccupancySnapshot::filled([1.0, -2.0, 0.5], 0.1, [3, 2, 2], CellState::Free).unwrap();
        occ.set(2, 1, 1, CellState::Occupied);
        occ.set(0, 0, 0, CellState::Unknown);
        let mut buf = Vec::new();
        occ.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 12);
        // x-fastest layout
        assert_eq!(buf[HEADER_LEN + 2 + 3 * (1 + 2)], 2);
        let back = OccupancySnapshot::read_from(&buf[..]).unwrap();
        assert_eq!(back, occ);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            OccupancySnapshot::new([0.0; 3], 0.0, [1, 1, 1], vec![CellState::Free]),
            Err(OccupancyError::BadResolution(_))
        ));
        assert!(matches!(
            OccupancySnapshot::new([0.0; 3], 0.1, [2, 1, 1], vec![CellState::Free]),
            Err(OccupancyError::DimsMismatch { .. })
        ));
        assert!(matches!(OccupancySnapshot::read_from(&[0u8; 5][..]), Err(OccupancyError::Truncated)));
    }

    #[test]
    fn out_of_bounds_is_unknown() {
        let occ = OccupancySnapshot::filled([0.0; 3], 1.0, [1, 1, 1], CellState::Free).unwrap();
        assert_eq!(occ.get_signed(-1, 0, 0), CellState::Unknown);
        assert_eq!(occ.get_signed(0, 0, 1), CellState::Unknown);
        assert_eq!(occ.get_signed(0, 0, 0), CellState::Free);
    }
}
