//! Describer wire protocol, one JSON object per line.
//!
//! Request: `{"batch_id":1,"items":[{"frame_id":4,"track_id":9,"rle":"...","w":640,"h":480,"label_gt":"mug"}]}`
//!
//! Reply: `{"batch_id":1,"results":[{"text":"...","emb_img":[..d1..],"emb_txt":[..d2..]}]}`
//!
//! Results may echo `frame_id`/`track_id`; when present they must match the
//! request item at the same position. Text embedding for queries uses
//! `{"embed_text":"..."}` and is answered with `{"emb_img":[..],"emb_txt":[..]}`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestItem {
    pub frame_id: u64,
    pub track_id: u64,
    pub rle: String,
    pub w: u32,
    pub h: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_gt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescribeRequest {
    pub batch_id: u64,
    pub items: Vec<RequestItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplyItem {
    pub text: String,
    pub emb_img: Vec<f64>,
    pub emb_txt: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track_id: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescribeReply {
    pub batch_id: u64,
    pub results: Vec<ReplyItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedRequest {
    pub embed_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedReply {
    pub emb_img: Vec<f64>,
    pub emb_txt: Vec<f64>,
}

/// Any request line a backend may receive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyRequest {
    Describe(DescribeRequest),
    Embed(EmbedRequest),
}
