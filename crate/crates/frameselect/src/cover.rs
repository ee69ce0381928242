use crate::matrix::VisibilityMatrix;
use crate::SelectError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverResult {
    pub k_star: usize,
    /// Row indices in pick order.
    pub frames: Vec<usize>,
}

impl CoverResult {
    pub fn frame_ids(&self, vis: &VisibilityMatrix) -> Vec<u64> {
        self.frames.iter().map(|&i| vis.frame_ids[i]).collect()
    }
}

/// Greedy minimum set cover: repeatedly take the frame that sees the most
/// still-uncovered fragments (lowest row on ties).
pub fn greedy_set_cover(vis: &VisibilityMatrix) -> Result<CoverResult, SelectError> {
    let (n, m) = (vis.n(), vis.m());
    if let Some(j) = (0..m).find(|&j| !(0..n).any(|i| vis.get(i, j))) {
        return Err(SelectError::Uncoverable(vis.fragment_ids[j]));
    }
    let mut covered = vec![false; m];
    let mut remaining = m;
    let mut frames = Vec::new();
    while remaining > 0 {
        let (best, gain) = (0..n)
            .map(|i| (i, vis.row(i).iter().zip(&covered).filter(|(v, c)| **v && !**c).count()))
            .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        debug_assert!(gain > 0);
        for (c, &v) in covered.iter_mut().zip(vis.row(best)) {
            *c |= v;
        }
        remaining -= gain;
        frames.push(best);
    }
    Ok(CoverResult { k_star: frames.len(), frames })
}
