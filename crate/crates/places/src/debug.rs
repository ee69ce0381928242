use std::io::{self, Write};

use crate::field::{TravState, TraversabilityField};
use crate::tessellate::PlaceRect;

/// Binary PGM of the field: white traversable, gray unknown, black
/// nontraversable, rectangle outlines in light gray. Row 0 is the top
/// (largest y).
pub fn write_pgm<W: Write>(field: &TraversabilityField, rects: &[PlaceRect], mut w: W) -> io::Result<()> {
    let [nx, ny] = field.dims;
    let mut px: Vec<u8> = field
        .cells
        .iter()
        .map(|c| match c {
            TravState::Traversable => 255,
            TravState::Unknown => 128,
            TravState::Nontraversable => 0,
        })
        .collect();
    for r in rects {
        for (x, y) in r.cells() {
            if x == r.x0 || x + 1 == r.x1 || y == r.y0 || y + 1 == r.y1 {
                px[x + nx * y] = 200;
            }
        }
    }
    write!(w, "P5\n{nx} {ny}\n255\n")?;
    for y in (0..ny).rev() {
        w.write_all(&px[nx * y..nx * (y + 1)])?;
    }
    Ok(())
}

pub fn write_rects_json<W: Write>(rects: &[PlaceRect], w: W) -> io::Result<()> {
    serde_json::to_writer_pretty(w, rects).map_err(io::Error::other)
}
