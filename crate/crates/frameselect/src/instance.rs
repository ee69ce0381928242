//! JSON dump format for selection instances:
//! `{"n":3,"m":4,"v":[0,1,...],"q":[0.0,0.7,...],"epsilon":0}`, both
//! matrices row-major frames × fragments.

use serde::{Deserialize, Serialize};

use crate::assign::{solve_assignment, SelectionResult};
use crate::cover::greedy_set_cover;
use crate::matrix::{QualityMatrix, VisibilityMatrix};
use crate::SelectError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionInstance {
    pub n: usize,
    pub m: usize,
    pub v: Vec<u8>,
    pub q: Vec<f64>,
    pub epsilon: usize,
}

impl SelectionInstance {
    pub fn from_matrices(vis: &VisibilityMatrix, quality: &QualityMatrix, epsilon: usize) -> Self {
        let (n, m) = (vis.n(), vis.m());
        let mut v = Vec::with_capacity(n * m);
        let mut q = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                v.push(vis.get(i, j) as u8);
                q.push(quality.get(i, j));
            }
        }
        Self { n, m, v, q, epsilon }
    }

    pub fn matrices(&self) -> Result<(VisibilityMatrix, QualityMatrix), SelectError> {
        if let Some(bad) = self.v.iter().find(|&&b| b > 1) {
            return Err(SelectError::Shape(format!("visibility entry {bad} is not 0/1")));
        }
        let vis = VisibilityMatrix::from_dense(self.n, self.m, self.v.iter().map(|&b| b == 1).collect())?;
        let quality = QualityMatrix::new(&vis, self.q.clone())?;
        Ok((vis, quality))
    }

    /// Runs greedy cover followed by the exact assignment.
    pub fn solve(&self) -> Result<SelectionResult, SelectError> {
        let (vis, quality) = self.matrices()?;
        let cover = greedy_set_cover(&vis)?;
        solve_assignment(&vis, &quality, cover.k_star, self.epsilon)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
