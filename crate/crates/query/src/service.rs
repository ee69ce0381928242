use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sg4d_annotator::Annotator;
use sg4d_core::geom::Vec3;
use sg4d_scenegraph::{GraphHandle, SceneGraph4D};

use crate::tools::{fragments_in_radius, objects_in_region, region_information, semantic_search, DEFAULT_TOP_N};
use crate::trajectory::agent_trajectory;
use crate::QueryError;

pub const TOOLS: [&str; 5] =
    ["semantic_search", "fragments_in_radius", "region_information", "objects_in_region", "agent_trajectory"];

/// Turns query text into the graph's feature space.
pub trait TextEmbedder: Send {
    fn embed(&mut self, text: &str) -> Result<Vec<f64>, String>;
}

impl TextEmbedder for Annotator {
    fn embed(&mut self, text: &str) -> Result<Vec<f64>, String> {
        self.embed_text(text).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolRequest {
    pub tool: String,
    #[serde(default)]
    pub args: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolReply {
    pub tool: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ToolReply {
    fn ok(tool: &str, data: Value) -> Self {
        Self { tool: tool.into(), ok: true, data: Some(data), error: None }
    }

    fn err(tool: &str, error: impl ToString) -> Self {
        Self { tool: tool.into(), ok: false, data: None, error: Some(error.to_string()) }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchArgs {
    text: Option<String>,
    feature: Option<Vec<f64>>,
    n: Option<usize>,
    region_id: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RadiusArgs {
    position: Vec3,
    radius: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryArgs {
    start: Vec3,
    end: Vec3,
    n: Option<usize>,
}

pub struct QueryService {
    graph: GraphHandle,
    embedder: Option<Mutex<Box<dyn TextEmbedder>>>,
}

impl QueryService {
    pub fn new(graph: GraphHandle, embedder: Option<Box<dyn TextEmbedder>>) -> Self {
        Self { graph, embedder: embedder.map(Mutex::new) }
    }

    pub fn graph(&self) -> &GraphHandle {
        &self.graph
    }

    /// Answers one request line; malformed input yields an error envelope.
    pub fn handle_line(&self, line: &str) -> String {
        let reply = match serde_json::from_str::<ToolRequest>(line) {
            Ok(req) => self.handle(&req),
            Err(e) => ToolReply::err("", format!("malformed request: {e}")),
        };
        serde_json::to_string(&reply).expect("replies serialize")
    }

    pub fn handle(&self, req: &ToolRequest) -> ToolReply {
        let snapshot = self.graph.snapshot();
        match self.dispatch(&snapshot, req) {
            Ok(data) => ToolReply::ok(&req.tool, data),
            Err(e) => ToolReply::err(&req.tool, e),
        }
    }

    fn dispatch(&self, graph: &SceneGraph4D, req: &ToolRequest) -> Result<Value, QueryError> {
        let args = if req.args.is_null() { json!({}) } else { req.args.clone() };
        let parse_err = |e: serde_json::Error| QueryError::BadArgs(e.to_string());
        match req.tool.as_str() {
            "semantic_search" | "objects_in_region" => {
                let a: SearchArgs = serde_json::from_value(args).map_err(parse_err)?;
                let query = self.query_feature(a.text.as_deref(), a.feature)?;
                let n = a.n.unwrap_or(DEFAULT_TOP_N);
                let hits = if req.tool == "semantic_search" {
                    if a.region_id.is_some() {
                        return Err(QueryError::BadArgs("semantic_search takes no region_id".into()));
                    }
                    semantic_search(graph, &query, n)?
                } else {
                    let rid = a.region_id.ok_or_else(|| QueryError::BadArgs("missing region_id".into()))?;
                    objects_in_region(graph, rid, &query, n)?
                };
                Ok(to_value(&hits))
            }
            "fragments_in_radius" => {
                let a: RadiusArgs = serde_json::from_value(args).map_err(parse_err)?;
                Ok(to_value(&fragments_in_radius(graph, a.position, a.radius)?))
            }
            "region_information" => Ok(to_value(&region_information(graph))),
            "agent_trajectory" => {
                let a: TrajectoryArgs = serde_json::from_value(args).map_err(parse_err)?;
                Ok(to_value(&agent_trajectory(graph, a.start, a.end, a.n.unwrap_or(DEFAULT_TOP_N))?))
            }
            other => Err(QueryError::UnknownTool(other.into())),
        }
    }

    fn query_feature(&self, text: Option<&str>, feature: Option<Vec<f64>>) -> Result<Vec<f64>, QueryError> {
        match (text, feature) {
            (_, Some(f)) => Ok(f),
            (Some(t), None) => {
                let embedder = self.embedder.as_ref().ok_or(QueryError::NoEmbedder)?;
                let mut e = embedder.lock().unwrap_or_else(|p| p.into_inner());
                e.embed(t).map_err(QueryError::Embed)
            }
            (None, None) => Err(QueryError::BadArgs("need text or feature".into())),
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("tool results serialize")
}
