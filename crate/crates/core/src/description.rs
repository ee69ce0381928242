//! Text descriptions with their embedding features, and the vector helpers
//! shared by every layer that compares features.

use serde::{Deserialize, Serialize};

use crate::types::Timestamp;

/// Closed time interval `[start, end]` covered by a description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Interval {
    pub fn new(start: Timestamp, end: Timestamp) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// One description of a fragment (or ground patch) produced by the describer
/// backend for a single window.
///
/// `feature` is the concatenation of the image-text embedding and the
/// sentence embedding, each L2-normalized and scaled by `1/sqrt(2)`, so the
/// whole vector has unit norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptionRecord {
    pub text: String,
    pub feature: Vec<f64>,
    pub interval: Interval,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn l2_norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Returns `None` for a zero (or non-finite) vector.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = l2_norm(a);
    if !n.is_finite() || n <= f64::EPSILON {
        return None;
    }
    Some(a.iter().map(|x| x / n).collect())
}

/// Cosine similarity; zero vectors compare as 0.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = l2_norm(a);
    let nb = l2_norm(b);
    if na <= f64::EPSILON || nb <= f64::EPSILON {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    1.0 - cosine(a, b)
}

/// Concatenates two embeddings after normalizing each half and scaling it by
/// `1/sqrt(2)`. Returns `None` if either half is zero.
pub fn concat_features(image_text: &[f64], sentence: &[f64]) -> Option<Vec<f64>> {
    let a = normalized(image_text)?;
    let b = normalized(sentence)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Some(a.iter().chain(b.iter()).map(|x| x * s).collect())
}

/// Normalized mean of a set of equal-length vectors.
pub fn mean_feature<'a, I>(features: I) -> Option<Vec<f64>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut acc: Option<Vec<f64>> = None;
    for f in features {
        match acc.as_mut() {
            None => acc = Some(f.to_vec()),
            Some(sum) => {
                for (s, x) in sum.iter_mut().zip(f) {
                    *s += x;
                }
            }
        }
    }
    acc.and_then(|s| normalized(&s))
}
