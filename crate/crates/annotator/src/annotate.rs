use sg4d_core::description::concat_features;
use sg4d_core::{DescriptionRecord, Interval};

use crate::batch::AnnotationBatch;
use crate::protocol::{DescribeRequest, RequestItem};
use crate::{AnnotateError, DescriberBackend};

/// Sends batches to a backend and validates what comes back.
pub struct Annotator {
    backend: Box<dyn DescriberBackend>,
    d1: usize,
    d2: usize,
    next_batch_id: u64,
    calls: u64,
}

impl Annotator {
    pub fn new(backend: Box<dyn DescriberBackend>, d1: usize, d2: usize) -> Self {
        Self { backend, d1, d2, next_batch_id: 1, calls: 0 }
    }

    /// Backend describe calls made so far.
    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn feature_dim(&self) -> usize {
        self.d1 + self.d2
    }

    /// Describes every item of `batch`; the i-th record belongs to the i-th
    /// item. `interval` is the source window's time span.
    pub fn annotate(&mut self, batch: &AnnotationBatch, interval: Interval) -> Result<Vec<DescriptionRecord>, AnnotateError> {
        if batch.items.is_empty() {
            return Ok(Vec::new());
        }
        let batch_id = self.next_batch_id;
        self.next_batch_id += 1;
        let request = DescribeRequest {
            batch_id,
            items: batch
                .items
                .iter()
                .map(|it| RequestItem {
                    frame_id: it.frame_id,
                    track_id: it.track_id,
                    rle: it.mask.to_string(),
                    w: it.mask.width,
                    h: it.mask.height,
                    label_gt: it.label_gt.clone(),
                })
                .collect(),
        };
        self.calls += 1;
        let reply = self.backend.describe(&request)?;

        if reply.batch_id != batch_id {
            return Err(AnnotateError::Protocol(format!("reply for batch {} to request {batch_id}", reply.batch_id)));
        }
        if reply.results.len() != request.items.len() {
            return Err(AnnotateError::Protocol(format!(
                "{} results for {} items",
                reply.results.len(),
                request.items.len()
            )));
        }
        request
            .items
            .iter()
            .zip(reply.results)
            .enumerate()
            .map(|(k, (item, res))| {
                let echo_ok = res.frame_id.is_none_or(|f| f == item.frame_id)
                    && res.track_id.is_none_or(|t| t == item.track_id);
                if !echo_ok {
                    return Err(AnnotateError::Protocol(format!(
                        "result {k} is for ({:?}, {:?}), expected ({}, {})",
                        res.frame_id, res.track_id, item.frame_id, item.track_id
                    )));
                }
                let feature = self.feature(&res.emb_img, &res.emb_txt)?;
                Ok(DescriptionRecord { text: res.text, feature, interval })
            })
            .collect()
    }

    /// Embeds a text query into the same concatenated feature space.
    pub fn embed_text(&mut self, text: &str) -> Result<Vec<f64>, AnnotateError> {
        let reply = self.backend.embed_text(text)?;
        self.feature(&reply.emb_img, &reply.emb_txt)
    }

    fn feature(&self, img: &[f64], txt: &[f64]) -> Result<Vec<f64>, AnnotateError> {
        if img.len() != self.d1 || txt.len() != self.d2 {
            return Err(AnnotateError::Protocol(format!(
                "embedding dims ({}, {}), expected ({}, {})",
                img.len(),
                txt.len(),
                self.d1,
                self.d2
            )));
        }
        concat_features(img, txt).ok_or_else(|| AnnotateError::Protocol("zero or non-finite embedding".into()))
    }
}
