//! Exact solver for the budgeted assignment stage.
//!
//! Given a budget `K`, choose exactly `K` frames and assign each fragment to
//! one chosen frame where it is visible, maximizing total quality. For a
//! fixed frame set the best assignment is per-fragment argmax, so the search
//! runs over frame subsets only.
//!
//! While some fragment is uncovered the search branches on the uncovered
//! fragment with the fewest remaining candidate frames, trying each
//! candidate in turn and excluding it from later siblings, so every frame
//! set is reached once. Once everything is covered it branches on including
//! or excluding the frame with the largest marginal gain. Nodes are pruned
//! when the uncovered fragments need more frames than remain (a packing of
//! fragments with pairwise disjoint candidates) or by the smaller of two
//! upper bounds:
//!
//! * per fragment, the best quality among chosen and still-allowed frames;
//! * current value plus the `r` largest single-frame marginal gains, which is
//!   valid because the objective is monotone submodular in the frame set.
//!
//! The incumbent starts from the greedy cover padded with the best marginal
//! frames and improved by single swaps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cover::greedy_set_cover;
use crate::matrix::{QualityMatrix, VisibilityMatrix};
use crate::SelectError;

/// Slack added to the marginal-gain bound, which is summed in a different
/// order than leaf objectives.
const GAIN_BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub k_star: usize,
    pub epsilon: usize,
    /// Number of frames actually selected (`min(k* + epsilon, n)`, raised only
    /// when a smaller budget is infeasible).
    pub budget: usize,
    /// Selected frame ids, ascending.
    pub selected_frames: Vec<u64>,
    /// Fragment (track) id to frame id.
    pub assignment: BTreeMap<u64, u64>,
    pub objective: f64,
    /// Search nodes expanded.
    pub nodes: u64,
    /// False when the node limit cut the search short; the result is then
    /// the best set found.
    #[serde(default = "proven")]
    pub optimal: bool,
}

fn proven() -> bool {
    true
}

/// Solves the assignment stage exactly. When no feasible assignment exists
/// within `min(k_star + epsilon, n)` frames the budget is raised one frame at
/// a time up to `n`.
pub fn solve_assignment(
    vis: &VisibilityMatrix,
    quality: &QualityMatrix,
    k_star: usize,
    epsilon: usize,
) -> Result<SelectionResult, SelectError> {
    solve_assignment_limited(vis, quality, k_star, epsilon, u64::MAX)
}

/// [`solve_assignment`] that stops expanding after `max_nodes` search nodes
/// per budget and returns the best set found so far.
pub fn solve_assignment_limited(
    vis: &VisibilityMatrix,
    quality: &QualityMatrix,
    k_star: usize,
    epsilon: usize,
    max_nodes: u64,
) -> Result<SelectionResult, SelectError> {
    let (n, m) = (vis.n(), vis.m());
    if quality.n() != n || quality.m() != m {
        return Err(SelectError::Shape("visibility and quality disagree".into()));
    }
    let mut budget = (k_star + epsilon).min(n);
    let mut nodes = 0;
    loop {
        let mut search = Search::new(vis, quality, budget, max_nodes);
        search.warm_start();
        search.run();
        nodes += search.nodes;
        if let Some((objective, set)) = search.best.take() {
            let mut r = build_result(vis, quality, k_star, epsilon, budget, &set, objective, nodes);
            r.optimal = !search.truncated;
            return Ok(r);
        }
        if budget >= n {
            return Err(SelectError::Infeasible(budget));
        }
        budget += 1;
    }
}

#[allow(clippy::too_many_arguments)]
fn build_result(
    vis: &VisibilityMatrix,
    quality: &QualityMatrix,
    k_star: usize,
    epsilon: usize,
    budget: usize,
    set: &[usize],
    objective: f64,
    nodes: u64,
) -> SelectionResult {
    let assignment = (0..vis.m())
        .map(|j| {
            let frame = best_frame_for(vis, quality, set, j).expect("feasible set covers every fragment");
            (vis.fragment_ids[j], vis.frame_ids[frame])
        })
        .collect();
    SelectionResult {
        k_star,
        epsilon,
        budget,
        selected_frames: set.iter().map(|&i| vis.frame_ids[i]).collect(),
        assignment,
        objective,
        nodes,
        optimal: true,
    }
}

/// Highest-quality visible frame for fragment `j` in `set` (earliest on ties).
fn best_frame_for(vis: &VisibilityMatrix, quality: &QualityMatrix, set: &[usize], j: usize) -> Option<usize> {
    set.iter()
        .copied()
        .filter(|&i| vis.get(i, j))
        .fold(None, |best: Option<usize>, i| match best {
            Some(b) if quality.get(b, j) >= quality.get(i, j) => Some(b),
            _ => Some(i),
        })
}

/// Objective of a frame set, or `None` if some fragment is uncovered. Sums in
/// fragment order so equal sets always produce identical values.
fn evaluate(vis: &VisibilityMatrix, quality: &QualityMatrix, set: &[usize]) -> Option<f64> {
    let mut total = 0.0;
    for j in 0..vis.m() {
        total += quality.get(best_frame_for(vis, quality, set, j)?, j);
    }
    Some(total)
}

struct Search<'a> {
    vis: &'a VisibilityMatrix,
    quality: &'a QualityMatrix,
    budget: usize,
    max_nodes: u64,
    /// Visible `(fragment, quality)` pairs per frame.
    rows: Vec<Vec<(usize, f64)>>,
    /// Frames seeing each fragment.
    candidates: Vec<Vec<usize>>,
    /// Neither chosen nor excluded on the current path.
    allowed: Vec<bool>,
    chosen: Vec<usize>,
    /// Best quality of each fragment among chosen frames, -1 if uncovered.
    current: Vec<f64>,
    best: Option<(f64, Vec<usize>)>,
    nodes: u64,
    truncated: bool,
}

impl<'a> Search<'a> {
    fn new(vis: &'a VisibilityMatrix, quality: &'a QualityMatrix, budget: usize, max_nodes: u64) -> Self {
        let (n, m) = (vis.n(), vis.m());
        let rows: Vec<Vec<(usize, f64)>> =
            (0..n).map(|i| (0..m).filter(|&j| vis.get(i, j)).map(|j| (j, quality.get(i, j))).collect()).collect();
        let candidates = (0..m).map(|j| (0..n).filter(|&i| vis.get(i, j)).collect()).collect();
        Self {
            vis,
            quality,
            budget,
            max_nodes,
            rows,
            candidates,
            allowed: vec![true; n],
            chosen: Vec::with_capacity(budget),
            current: vec![-1.0; m],
            best: None,
            nodes: 0,
            truncated: false,
        }
    }

    fn offer(&mut self, mut set: Vec<usize>, value: f64) {
        set.sort_unstable();
        let better = match &self.best {
            None => true,
            Some((bv, bs)) => value > *bv || (value == *bv && set < *bs),
        };
        if better {
            self.best = Some((value, set));
        }
    }

    /// Greedy cover padded with the best marginal frames, then improved by
    /// swapping single frames while that helps.
    fn warm_start(&mut self) {
        let Ok(cover) = greedy_set_cover(self.vis) else { return };
        if cover.k_star > self.budget {
            return;
        }
        let n = self.vis.n();
        let mut set = cover.frames;
        while set.len() < self.budget {
            let next = (0..n)
                .filter(|i| !set.contains(i))
                .map(|i| {
                    let mut with = set.clone();
                    with.push(i);
                    (i, evaluate(self.vis, self.quality, &with).unwrap_or(f64::NEG_INFINITY))
                })
                .fold(None, |acc: Option<(usize, f64)>, cur| match acc {
                    Some(a) if a.1 >= cur.1 => Some(a),
                    _ => Some(cur),
                });
            match next {
                Some((i, _)) => set.push(i),
                None => break,
            }
        }
        let Some(mut value) = evaluate(self.vis, self.quality, &set) else { return };
        // first-improvement swaps, bounded so the warm start stays cheap
        for _ in 0..4 * self.budget.max(1) {
            let mut improved = false;
            'scan: for k in 0..set.len() {
                for i in 0..n {
                    if set.contains(&i) {
                        continue;
                    }
                    let old = set[k];
                    set[k] = i;
                    match evaluate(self.vis, self.quality, &set) {
                        Some(v) if v > value => {
                            value = v;
                            improved = true;
                            break 'scan;
                        }
                        _ => set[k] = old,
                    }
                }
            }
            if !improved {
                break;
            }
        }
        self.offer(set, value);
    }

    fn run(&mut self) {
        self.dfs();
    }

    fn gain(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(j, q)| (q - self.current[j].max(0.0)).max(0.0)).sum()
    }

    fn choose(&mut self, i: usize) -> Vec<f64> {
        let saved = self.current.clone();
        for &(j, q) in &self.rows[i] {
            if q > self.current[j] {
                self.current[j] = q;
            }
        }
        self.allowed[i] = false;
        self.chosen.push(i);
        saved
    }

    fn unchoose(&mut self, i: usize, saved: Vec<f64>) {
        self.chosen.pop();
        self.allowed[i] = true;
        self.current = saved;
    }

    /// Lower bound on frames still needed: uncovered fragments whose allowed
    /// candidates are pairwise disjoint each need their own frame.
    fn packing_bound(&self, uncovered: &[usize]) -> usize {
        let mut order: Vec<(usize, usize)> = uncovered
            .iter()
            .map(|&j| (self.candidates[j].iter().filter(|&&i| self.allowed[i]).count(), j))
            .collect();
        order.sort_unstable();
        let mut used = vec![false; self.vis.n()];
        let mut count = 0;
        for (_, j) in order {
            let frames = self.candidates[j].iter().filter(|&&i| self.allowed[i]);
            if frames.clone().any(|&i| used[i]) {
                continue;
            }
            for &i in frames {
                used[i] = true;
            }
            count += 1;
        }
        count
    }

    fn dfs(&mut self) {
        if self.nodes >= self.max_nodes {
            self.truncated = true;
            return;
        }
        self.nodes += 1;
        let m = self.vis.m();
        let remaining = self.budget - self.chosen.len();
        let uncovered: Vec<usize> = (0..m).filter(|&j| self.current[j] < 0.0).collect();

        if remaining == 0 {
            if uncovered.is_empty() {
                let value = self.current.iter().sum::<f64>();
                self.offer(self.chosen.clone(), value);
            }
            return;
        }
        let allowed: Vec<usize> = (0..self.vis.n()).filter(|&i| self.allowed[i]).collect();
        if allowed.len() < remaining {
            return;
        }

        // Bound 1 (also the coverage feasibility check).
        let mut best_allowed = self.current.clone();
        for &i in &allowed {
            for &(j, q) in &self.rows[i] {
                if q > best_allowed[j] {
                    best_allowed[j] = q;
                }
            }
        }
        if best_allowed.iter().any(|&b| b < 0.0) {
            return;
        }
        if !uncovered.is_empty() && self.packing_bound(&uncovered) > remaining {
            return;
        }
        let bound_cover: f64 = best_allowed.iter().sum();
        // Bound 2: submodular marginal gains.
        let mut gains: Vec<(f64, usize)> = allowed.iter().map(|&i| (self.gain(i), i)).collect();
        gains.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let base: f64 = self.current.iter().map(|c| c.max(0.0)).sum();
        let bound_gain = base + gains[..remaining].iter().map(|g| g.0).sum::<f64>() + GAIN_BOUND_SLACK;
        let bound = bound_cover.min(bound_gain);

        if let Some((best_value, best_set)) = &self.best {
            if bound < *best_value {
                return;
            }
            if bound == *best_value && !self.lex_min_completion_below(&allowed, remaining, best_set) {
                return;
            }
        }

        if let Some(&j) = uncovered.iter().min_by_key(|&&j| {
            (self.candidates[j].iter().filter(|&&i| self.allowed[i]).count(), j)
        }) {
            // cover fragment j: each allowed candidate in order of gain
            let rank: BTreeMap<usize, usize> = gains.iter().enumerate().map(|(r, g)| (g.1, r)).collect();
            let mut options: Vec<usize> = self.candidates[j].iter().copied().filter(|&i| self.allowed[i]).collect();
            options.sort_by_key(|i| rank[i]);
            let mut excluded = Vec::with_capacity(options.len());
            for i in options {
                let saved = self.choose(i);
                self.dfs();
                self.unchoose(i, saved);
                self.allowed[i] = false;
                excluded.push(i);
                if self.truncated {
                    break;
                }
            }
            for i in excluded {
                self.allowed[i] = true;
            }
        } else {
            // all covered: take or skip the frame with the largest gain
            let i = gains[0].1;
            let saved = self.choose(i);
            self.dfs();
            self.unchoose(i, saved);
            if !self.truncated {
                self.allowed[i] = false;
                self.dfs();
                self.allowed[i] = true;
            }
        }
    }

    /// Whether some completion of this node could be lexicographically
    /// smaller than `best_set` (only matters when values tie).
    fn lex_min_completion_below(&self, allowed: &[usize], remaining: usize, best_set: &[usize]) -> bool {
        let mut candidate: Vec<usize> = self.chosen.iter().copied().chain(allowed.iter().copied().take(remaining)).collect();
        candidate.sort_unstable();
        candidate.as_slice() < best_set
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(n: usize, m: usize, q: &[f64]) -> (VisibilityMatrix, QualityMatrix) {
        let v = VisibilityMatrix::from_dense(n, m, q.iter().map(|&x| x > 0.0).collect()).unwrap();
        let qm = QualityMatrix::new(&v, q.to_vec()).unwrap();
        (v, qm)
    }

    #[test]
    fn single_frame_takes_everything() {
        let (v, q) = dense(1, 3, &[0.2, 0.3, 0.4]);
        let r = solve_assignment(&v, &q, 1, 1).unwrap();
        assert_eq!(r.budget, 1);
        assert_eq!(r.selected_frames, vec![0]);
        assert_eq!(r.objective, 0.2 + 0.3 + 0.4);
        assert!(r.assignment.values().all(|&f| f == 0));
    }

    #[test]
    fn epsilon_frame_is_used_when_it_helps() {
        // frame 0 sees both fragments poorly, frames 1 and 2 see one each well
        let (v, q) = dense(3, 2, &[0.1, 0.1, 0.9, 0.0, 0.0, 0.8]);
        let r0 = solve_assignment(&v, &q, 1, 0).unwrap();
        assert_eq!(r0.selected_frames, vec![0]);
        let r1 = solve_assignment(&v, &q, 1, 1).unwrap();
        assert_eq!(r1.selected_frames, vec![1, 2]);
        assert!((r1.objective - 1.7).abs() < 1e-12);
    }

    #[test]
    fn too_small_budget_is_raised() {
        let (v, q) = dense(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        let r = solve_assignment(&v, &q, 1, 0).unwrap();
        assert_eq!(r.budget, 2);
        assert_eq!(r.selected_frames, vec![0, 1]);
    }

    #[test]
    fn ties_prefer_smallest_frame_set() {
        let (v, q) = dense(3, 1, &[0.5, 0.5, 0.5]);
        let r = solve_assignment(&v, &q, 1, 1).unwrap();
        assert_eq!(r.selected_frames, vec![0, 1]);
        assert_eq!(r.assignment[&0], 0);
    }

    #[test]
    fn budget_clamped_to_frame_count() {
        let (v, q) = dense(2, 1, &[0.5, 0.7]);
        let r = solve_assignment(&v, &q, 1, 5).unwrap();
        assert_eq!(r.budget, 2);
        assert_eq!(r.assignment[&0], 1);
    }
}
