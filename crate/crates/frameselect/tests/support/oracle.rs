//! Brute-force references for frame selection. Independent of the solver:
//! they enumerate assignments and subsets directly.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Dense instance: `v[i][j]`, `q[i][j]`, frames × fragments.
#[derive(Debug, Clone)]
pub struct Dense {
    pub n: usize,
    pub m: usize,
    pub v: Vec<Vec<bool>>,
    pub q: Vec<Vec<f64>>,
}

impl Dense {
    pub fn flat_v(&self) -> Vec<bool> {
        self.v.iter().flatten().copied().collect()
    }

    pub fn flat_q(&self) -> Vec<f64> {
        self.q.iter().flatten().copied().collect()
    }
}

/// Random instance where every fragment is visible somewhere.
pub fn random_instance(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Dense {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(1..=max_m);
    let mut v = vec![vec![false; m]; n];
    for j in 0..m {
        for row in v.iter_mut() {
            row[j] = rng.random_bool(0.45);
        }
        if !(0..n).any(|i| v[i][j]) {
            let i = rng.random_range(0..n);
            v[i][j] = true;
        }
    }
    let q = v
        .iter()
        .map(|row| row.iter().map(|&vis| if vis { rng.random_range(0.0..1.0) } else { 0.0 }).collect())
        .collect();
    Dense { n, m, v, q }
}

/// Exhaustive optimum over every `(x, y)`: each fragment picks any frame in
/// which it is visible; the assignment is feasible when it touches at most
/// `budget` distinct frames (the rest of the budget is padding). Sums in
/// fragment order.
pub fn brute_force_assignment(inst: &Dense, budget: usize) -> Option<f64> {
    let options: Vec<Vec<usize>> = (0..inst.m).map(|j| (0..inst.n).filter(|&i| inst.v[i][j]).collect()).collect();
    if options.iter().any(|o| o.is_empty()) {
        return None;
    }
    let mut choice = vec![0usize; inst.m];
    let mut best: Option<f64> = None;
    loop {
        let mut used = vec![false; inst.n];
        let mut value = 0.0;
        for j in 0..inst.m {
            let i = options[j][choice[j]];
            used[i] = true;
            value += inst.q[i][j];
        }
        if used.iter().filter(|u| **u).count() <= budget && best.is_none_or(|b| value > b) {
            best = Some(value);
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == inst.m {
                return best;
            }
            choice[k] += 1;
            if choice[k] < options[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Exhaustive optimum over all frame subsets of exactly `budget` frames, with
/// per-fragment best assignment. Used where full `(x, y)` enumeration is too
/// large.
pub fn brute_force_subsets(inst: &Dense, budget: usize) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..budget).collect();
    loop {
        let mut value = 0.0;
        let mut feasible = true;
        for j in 0..inst.m {
            let b = subset.iter().filter(|&&i| inst.v[i][j]).map(|&i| inst.q[i][j]).fold(-1.0, f64::max);
            if b < 0.0 {
                feasible = false;
                break;
            }
            value += b;
        }
        if feasible && best.is_none_or(|b| value > b) {
            best = Some(value);
        }
        // next combination
        let mut k = budget;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if subset[k] < inst.n - budget + k {
                subset[k] += 1;
                for t in k + 1..budget {
                    subset[t] = subset[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Exact minimum cover size by subset enumeration.
pub fn exact_min_cover(inst: &Dense) -> Option<usize> {
    (0..1u32 << inst.n)
        .filter(|mask| (0..inst.m).all(|j| (0..inst.n).any(|i| mask & (1 << i) != 0 && inst.v[i][j])))
        .map(|mask| mask.count_ones() as usize)
        .min()
}
