//! Run-length encoded binary masks.
//!
//! The textual form is a comma-separated list of run lengths over the
//! row-major `width * height` bitmap, alternating unset/set and always
//! starting with an unset run (which may be `0`). The runs sum to
//! `width * height`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MaskError {
    #[error("invalid run length {0:?}")]
    BadRun(String),
    #[error("runs cover {got} pixels, expected {expected}")]
    LengthMismatch { got: u64, expected: u64 },
    #[error("bitmap has {got} pixels, expected {expected}")]
    BitmapSize { got: usize, expected: usize },
    #[error("span {start}+{len} out of bounds or unsorted")]
    BadSpan { start: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleMask {
    pub width: u32,
    pub height: u32,
    runs: Vec<u32>,
}

impl RleMask {
    pub fn empty(width: u32, height: u32) -> Self {
        Self { width, height, runs: vec![width * height] }
    }

    fn pixels(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn from_bitmap(width: u32, height: u32, bits: &[bool]) -> Result<Self, MaskError> {
        let expected = width as usize * height as usize;
        if bits.len() != expected {
            return Err(MaskError::BitmapSize { got: bits.len(), expected });
        }
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u32;
        for &b in bits {
            if b == current {
                len += 1;
            } else {
                runs.push(len);
                current = b;
                len = 1;
            }
        }
        runs.push(len);
        Ok(Self { width, height, runs })
    }

    /// Builds a mask from sorted, non-overlapping `(start, len)` spans of set
    /// pixels in row-major linear indexing.
    pub fn from_spans(width: u32, height: u32, spans: &[(usize, usize)]) -> Result<Self, MaskError> {
        let total = width as usize * height as usize;
        let mut runs = Vec::with_capacity(spans.len() * 2 + 1);
        let mut cursor = 0usize;
        for &(start, len) in spans {
            if start < cursor || start + len > total {
                return Err(MaskError::BadSpan { start, len });
            }
            if len == 0 {
                continue;
            }
            if start == cursor && !runs.is_empty() {
                // adjacent spans: extend the previous set run
                *runs.last_mut().unwrap() += len as u32;
            } else {
                runs.push((start - cursor) as u32);
                runs.push(len as u32);
            }
            cursor = start + len;
        }
        if runs.is_empty() {
            runs.push(total as u32);
        } else if cursor < total {
            runs.push((total - cursor) as u32);
        }
        Ok(Self { width, height, runs })
    }

    pub fn parse(s: &str, width: u32, height: u32) -> Result<Self, MaskError> {
        let runs = s
            .split(',')
            .map(|r| r.trim().parse::<u32>().map_err(|_| MaskError::BadRun(r.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let got: u64 = runs.iter().map(|&r| r as u64).sum();
        let expected = width as u64 * height as u64;
        if got != expected {
            return Err(MaskError::LengthMismatch { got, expected });
        }
        Ok(Self { width, height, runs })
    }

    pub fn runs(&self) -> &[u32] {
        &self.runs
    }

    pub fn decode(&self) -> Vec<bool> {
        let mut bits = Vec::with_capacity(self.pixels());
        for (i, &r) in self.runs.iter().enumerate() {
            bits.extend(std::iter::repeat(i % 2 == 1).take(r as usize));
        }
        bits
    }

    /// Iterates `(start, len)` spans of set pixels.
    pub fn spans(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let mut pos = 0usize;
        self.runs.iter().enumerate().filter_map(move |(i, &r)| {
            let start = pos;
            pos += r as usize;
            (i % 2 == 1 && r > 0).then_some((start, r as usize))
        })
    }

    pub fn count_set(&self) -> u64 {
        self.runs.iter().skip(1).step_by(2).map(|&r| r as u64).sum()
    }

    /// Mean pixel-center coordinate `(u, v)` of set pixels.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let w = self.width as usize;
        let (mut su, mut sv, mut n) = (0.0, 0.0, 0.0);
        for (start, len) in self.spans() {
            // split at row ends; each piece sums an arithmetic series
            let mut idx = start;
            let end = start + len;
            while idx < end {
                let (row, col) = (idx / w, idx % w);
                let k = (end - idx).min(w - col);
                su += k as f64 * (col as f64 + (k as f64 - 1.0) * 0.5 + 0.5);
                sv += k as f64 * (row as f64 + 0.5);
                idx += k;
            }
            n += len as f64;
        }
        (n > 0.0).then(|| (su / n, sv / n))
    }
}

impl fmt::Display for RleMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.runs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}
