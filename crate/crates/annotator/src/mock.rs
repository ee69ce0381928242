//! Deterministic stand-in for the captioning and embedding models.
//!
//! Text is `"a <label>"`. Each label maps to a fixed pseudo-random unit
//! vector per embedding half (seeded by the label and the mock seed); each
//! item adds a jitter of norm [`MockDescriber::JITTER`] orthogonal to the
//! label vector, so two items with the same label have cosine at least
//! `(1 - J^2) / (1 + J^2)` and unrelated labels are nearly orthogonal.

use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::protocol::{DescribeReply, DescribeRequest, EmbedReply, ReplyItem};
use crate::{AnnotateError, DescriberBackend};

const UNLABELED: &str = "unlabeled segment";

#[derive(Debug, Clone)]
pub struct MockDescriber {
    seed: u64,
    d1: usize,
    d2: usize,
    service_time: Duration,
    shuffle_replies: bool,
    calls: u64,
}

impl MockDescriber {
    pub const JITTER: f64 = 0.05;

    pub fn new(seed: u64, d1: usize, d2: usize) -> Self {
        Self { seed, d1, d2, service_time: Duration::ZERO, shuffle_replies: false, calls: 0 }
    }

    /// Sleeps this long per item in each describe call.
    pub fn with_service_time(mut self, per_item: Duration) -> Self {
        self.service_time = per_item;
        self
    }

    /// Fault injection: reverse the result order (echo ids still attached).
    pub fn with_shuffled_replies(mut self, on: bool) -> Self {
        self.shuffle_replies = on;
        self
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn text_for(label: Option<&str>) -> String {
        format!("a {}", label.unwrap_or(UNLABELED))
    }

    fn rng_for(&self, parts: &[&[u8]]) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        for p in parts {
            h.update((p.len() as u64).to_le_bytes());
            h.update(p);
        }
        let digest = h.finalize();
        ChaCha8Rng::from_seed(digest.into())
    }

    fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| StandardNormal.sample(rng)).collect()
    }

    /// Unit label vector for one half (`b"img"` or `b"txt"`).
    pub fn label_vector(&self, label: &str, half: &[u8]) -> Vec<f64> {
        let d = if half == b"img" { self.d1 } else { self.d2 };
        let v = Self::gaussian(&mut self.rng_for(&[b"label", half, label.as_bytes()]), d);
        sg4d_core::description::normalized(&v).expect("gaussian vector is nonzero")
    }

    fn jittered(&self, label: &str, half: &[u8], frame_id: u64, track_id: u64) -> Vec<f64> {
        let base = self.label_vector(label, half);
        let mut rng = self.rng_for(&[b"jitter", half, label.as_bytes(), &frame_id.to_le_bytes(), &track_id.to_le_bytes()]);
        let mut j = Self::gaussian(&mut rng, base.len());
        let along = sg4d_core::description::dot(&j, &base);
        for (x, b) in j.iter_mut().zip(&base) {
            *x -= along * b;
        }
        let Some(j) = sg4d_core::description::normalized(&j) else { return base };
        base.iter().zip(&j).map(|(b, x)| b + Self::JITTER * x).collect()
    }
}

impl DescriberBackend for MockDescriber {
    fn describe(&mut self, request: &DescribeRequest) -> Result<DescribeReply, AnnotateError> {
        self.calls += 1;
        if !self.service_time.is_zero() {
            std::thread::sleep(self.service_time * request.items.len() as u32);
        }
        let mut results: Vec<ReplyItem> = request
            .items
            .iter()
            .map(|it| {
                let label = it.label_gt.as_deref().unwrap_or(UNLABELED);
                ReplyItem {
                    text: Self::text_for(it.label_gt.as_deref()),
                    emb_img: self.jittered(label, b"img", it.frame_id, it.track_id),
                    emb_txt: self.jittered(label, b"txt", it.frame_id, it.track_id),
                    frame_id: Some(it.frame_id),
                    track_id: Some(it.track_id),
                }
            })
            .collect();
        if self.shuffle_replies {
            results.reverse();
        }
        Ok(DescribeReply { batch_id: request.batch_id, results })
    }

    fn embed_text(&mut self, text: &str) -> Result<EmbedReply, AnnotateError> {
        // "a red mug" and "red mug" embed alike
        let text = text.trim();
        let label = text.strip_prefix("a ").or_else(|| text.strip_prefix("an ")).unwrap_or(text);
        Ok(EmbedReply { emb_img: self.label_vector(label, b"img"), emb_txt: self.label_vector(label, b"txt") })
    }
}
