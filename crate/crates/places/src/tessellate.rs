//! Greedy maximal-rectangle tessellation of the traversable cells.
//!
//! Each round finds the largest axis-aligned rectangle of still-uncovered
//! traversable cells whose sides do not exceed `L` cells, claims it, and
//! repeats until nothing traversable is left. The search runs the classic
//! histogram method row by row with column heights capped at `L`; a bar of
//! height `h` spanning `W` columns yields a `min(W, L) × h` candidate placed
//! at the left edge of its span. Ties break toward the smaller top-left
//! corner (row, then column), then the shorter rectangle.

use serde::{Deserialize, Serialize};

use crate::field::{TravState, TraversabilityField};
use crate::PlacesError;

/// Half-open cell rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlaceRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl PlaceRect {
    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.x0..self.x1).contains(&x) && (self.y0..self.y1).contains(&y)
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.y0..self.y1).flat_map(move |y| (self.x0..self.x1).map(move |x| (x, y)))
    }

    /// Cells just outside one side.
    pub fn outside(&self, side: Side) -> Vec<(i64, i64)> {
        let (x0, y0, x1, y1) = (self.x0 as i64, self.y0 as i64, self.x1 as i64, self.y1 as i64);
        match side {
            Side::XMin => (y0..y1).map(|y| (x0 - 1, y)).collect(),
            Side::XMax => (y0..y1).map(|y| (x1, y)).collect(),
            Side::YMin => (x0..x1).map(|x| (x, y0 - 1)).collect(),
            Side::YMax => (x0..x1).map(|x| (x, y1)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    XMin,
    XMax,
    YMin,
    YMax,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::XMin, Side::XMax, Side::YMin, Side::YMax];

    pub fn opposite(self) -> Side {
        match self {
            Side::XMin => Side::XMax,
            Side::XMax => Side::XMin,
            Side::YMin => Side::YMax,
            Side::YMax => Side::YMin,
        }
    }
}

/// Side length cap in cells.
pub fn max_side_cells(max_side_m: f64, resolution: f64) -> Result<usize, PlacesError> {
    let l = (max_side_m / resolution + 1e-9).floor();
    if !(l >= 1.0) {
        return Err(PlacesError::MaxSideTooSmall { max_side_m, resolution });
    }
    Ok(l as usize)
}

pub fn tessellate(field: &TraversabilityField, max_side_m: f64) -> Result<Vec<PlaceRect>, PlacesError> {
    let cap = max_side_cells(max_side_m, field.resolution)?;
    let [nx, ny] = field.dims;
    let mut free: Vec<bool> = field.cells.iter().map(|c| *c == TravState::Traversable).collect();
    let mut remaining = free.iter().filter(|f| **f).count();
    let mut rects = Vec::new();
    while remaining > 0 {
        let r = best_rect(&free, nx, ny, cap).expect("an uncovered traversable cell yields a rectangle");
        for (x, y) in r.cells() {
            free[x + nx * y] = false;
        }
        remaining -= r.area();
        rects.push(r);
    }
    Ok(rects)
}

fn best_rect(free: &[bool], nx: usize, ny: usize, cap: usize) -> Option<PlaceRect> {
    // key: (area, then smaller y0, x0, h preferred)
    let better = |a: &PlaceRect, b: &PlaceRect| {
        (a.area(), std::cmp::Reverse((a.y0, a.x0, a.height())))
            > (b.area(), std::cmp::Reverse((b.y0, b.x0, b.height())))
    };
    let mut heights = vec![0usize; nx];
    let mut left = vec![0usize; nx];
    let mut right = vec![0usize; nx];
    let mut stack: Vec<usize> = Vec::with_capacity(nx);
    let mut best: Option<PlaceRect> = None;
    for y in 0..ny {
        for x in 0..nx {
            heights[x] = if free[x + nx * y] { (heights[x] + 1).min(cap) } else { 0 };
        }
        stack.clear();
        for x in 0..nx {
            while stack.last().is_some_and(|&s| heights[s] >= heights[x]) {
                stack.pop();
            }
            left[x] = stack.last().map_or(0, |&s| s + 1);
            stack.push(x);
        }
        stack.clear();
        for x in (0..nx).rev() {
            while stack.last().is_some_and(|&s| heights[s] >= heights[x]) {
                stack.pop();
            }
            right[x] = stack.last().map_or(nx, |&s| s);
            stack.push(x);
        }
        for x in 0..nx {
            let h = heights[x];
            if h == 0 {
                continue;
            }
            let w = (right[x] - left[x]).min(cap);
            let cand = PlaceRect { x0: left[x], y0: y + 1 - h, x1: left[x] + w, y1: y + 1 };
            if best.as_ref().is_none_or(|b| better(&cand, b)) {
                best = Some(cand);
            }
        }
    }
    best
}

/// Boundary label per side, in [`Side::ALL`] order.
///
/// A side is traversable when any cell across it is traversable. Otherwise
/// it takes the majority of unknown and nontraversable cells, ties going to
/// unknown.
pub fn side_labels(field: &TraversabilityField, rect: &PlaceRect) -> [TravState; 4] {
    Side::ALL.map(|side| {
        let mut unknown = 0usize;
        let mut blocked = 0usize;
        for (x, y) in rect.outside(side) {
            match field.get_signed(x, y) {
                TravState::Traversable => return TravState::Traversable,
                TravState::Unknown => unknown += 1,
                TravState::Nontraversable => blocked += 1,
            }
        }
        if blocked > unknown {
            TravState::Nontraversable
        } else {
            TravState::Unknown
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(rows: &[&str]) -> TraversabilityField {
        let ny = rows.len();
        let nx = rows[0].len();
        let mut cells = vec![TravState::Unknown; nx * ny];
        // first string is the top row (largest y)
        for (r, row) in rows.iter().enumerate() {
            let y = ny - 1 - r;
            for (x, ch) in row.chars().enumerate() {
                cells[x + nx * y] = match ch {
                    '.' => TravState::Traversable,
                    '#' => TravState::Nontraversable,
                    _ => TravState::Unknown,
                };
            }
        }
        TraversabilityField::from_states(1.0, [nx, ny], cells).unwrap()
    }

    #[test]
    fn open_square_under_the_cap_is_one_rect() {
        let f = field(&["...", "...", "..."]);
        assert_eq!(tessellate(&f, 3.0).unwrap(), vec![PlaceRect { x0: 0, y0: 0, x1: 3, y1: 3 }]);
    }

    #[test]
    fn cap_splits_a_strip() {
        let f = field(&["......."]);
        let rects = tessellate(&f, 3.0).unwrap();
        assert_eq!(
            rects,
            vec![
                PlaceRect { x0: 0, y0: 0, x1: 3, y1: 1 },
                PlaceRect { x0: 3, y0: 0, x1: 6, y1: 1 },
                PlaceRect { x0: 6, y0: 0, x1: 7, y1: 1 },
            ]
        );
    }

    #[test]
    fn l_shape_takes_the_big_block_first() {
        let f = field(&["..##", "....", "...."]);
        let rects = tessellate(&f, 10.0).unwrap();
        assert_eq!(rects[0], PlaceRect { x0: 0, y0: 0, x1: 4, y1: 2 });
        assert_eq!(rects[1], PlaceRect { x0: 0, y0: 2, x1: 2, y1: 3 });
        assert_eq!(rects.len(), 2);
    }

    #[test]
    fn labels_follow_neighbors() {
        let f = field(&["?##", "?..", "?##"]);
        let r = PlaceRect { x0: 1, y0: 1, x1: 3, y1: 2 };
        let labels = side_labels(&f, &r);
        assert_eq!(labels, [TravState::Unknown, TravState::Unknown, TravState::Nontraversable, TravState::Nontraversable]);
    }

    #[test]
    fn cap_below_resolution_is_rejected() {
        let f = field(&["."]);
        assert!(tessellate(&f, 0.5).is_err());
        assert_eq!(max_side_cells(2.0, 0.1).unwrap(), 20);
    }
}
