use std::sync::{Arc, RwLock};

use crate::graph::SceneGraph4D;

/// Shared handle through which one writer publishes immutable graph
/// versions and readers take consistent snapshots.
#[derive(Debug, Clone, Default)]
pub struct GraphHandle {
    current: Arc<RwLock<Arc<SceneGraph4D>>>,
}

impl GraphHandle {
    pub fn new(graph: SceneGraph4D) -> Self {
        Self { current: Arc::new(RwLock::new(Arc::new(graph))) }
    }

    pub fn publish(&self, graph: SceneGraph4D) {
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(graph);
    }

    pub fn snapshot(&self) -> Arc<SceneGraph4D> {
        Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()))
    }
}
