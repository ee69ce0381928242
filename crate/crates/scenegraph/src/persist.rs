//! `sg4d.graph` files: a JSON envelope naming the format and version around
//! the whole graph. Maps are ordered and floats print in shortest
//! round-trip form, so saving a loaded graph reproduces the same bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::graph::SceneGraph4D;
use crate::SceneGraphError;

pub const FORMAT_NAME: &str = "sg4d.graph";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub format: String,
    pub version: u32,
    pub graph: SceneGraph4D,
}

impl SceneGraph4D {
    pub fn to_bytes(&self) -> Result<Vec<u8>, SceneGraphError> {
        let file = GraphFile { format: FORMAT_NAME.into(), version: FORMAT_VERSION, graph: self.clone() };
        let mut out = serde_json::to_vec_pretty(&file).map_err(|e| SceneGraphError::Format(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SceneGraphError> {
        let file: GraphFile = serde_json::from_slice(bytes).map_err(|e| SceneGraphError::Format(e.to_string()))?;
        if file.format != FORMAT_NAME {
            return Err(SceneGraphError::Format(format!("unexpected format {:?}", file.format)));
        }
        if file.version != FORMAT_VERSION {
            return Err(SceneGraphError::Format(format!("unsupported version {}", file.version)));
        }
        Ok(file.graph)
    }

    pub fn save(&self, path: &Path) -> Result<(), SceneGraphError> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SceneGraphError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
