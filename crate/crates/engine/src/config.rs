//! Run configuration, loaded from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sg4d_annotator::{DescriberConfig, OverflowPolicy, WindowQueue};
use sg4d_core::DEFAULT_WINDOW_LEN;
use sg4d_frameselect::SelectParams;
use sg4d_places::DEFAULT_MAX_SIDE_M;
use sg4d_scenegraph::{ReconcileParams, RegionParams};

use crate::scene::SceneSpec;
use crate::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacesConfig {
    /// Robot footprint and height `[x, y, z]`, meters.
    pub robot_box: [f64; 3],
    pub max_side_m: f64,
}

impl Default for PlacesConfig {
    fn default() -> Self {
        Self { robot_box: [0.4, 0.4, 1.0], max_side_m: DEFAULT_MAX_SIDE_M }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueueConfig {
    pub capacity: usize,
    pub overflow: OverflowPolicy,
}

impl Default for QueueConfig {
    fn default() -> Self {
        Self { capacity: WindowQueue::<()>::DEFAULT_CAPACITY, overflow: OverflowPolicy::Block }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Fixes every stochastic choice; also seeds the mock describer.
    pub seed: u64,
    /// Frame stream to replay. Without one, `scene` is synthesized.
    pub input: Option<PathBuf>,
    pub scene: Option<SceneSpec>,
    pub output: PathBuf,
    /// Frames per window.
    pub window: usize,
    pub select: SelectParams,
    pub describer: DescriberConfig,
    pub reconcile: ReconcileParams,
    /// Also reconcile after every window, not only at the end.
    pub reconcile_each_window: bool,
    pub regions: RegionParams,
    pub places: PlacesConfig,
    pub queue: QueueConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            input: None,
            scene: None,
            output: PathBuf::from("out"),
            window: DEFAULT_WINDOW_LEN,
            select: SelectParams::default(),
            describer: DescriberConfig::default(),
            reconcile: ReconcileParams::default(),
            reconcile_each_window: true,
            regions: RegionParams::default(),
            places: PlacesConfig::default(),
            queue: QueueConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, EngineError> {
        toml::from_str(text).map_err(|e| EngineError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path).map_err(|e| EngineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        // relative paths resolve against the config file
        if let Some(dir) = path.parent() {
            if let Some(input) = &cfg.input {
                if input.is_relative() {
                    cfg.input = Some(dir.join(input));
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Describer settings with the run seed applied.
    pub fn describer(&self) -> DescriberConfig {
        DescriberConfig { mock_seed: self.seed, ..self.describer.clone() }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::Config(m));
        if self.window == 0 {
            return bad("window must be at least 1 frame".into());
        }
        let s = &self.select;
        if !(0.0..=1.0).contains(&s.alpha) {
            return bad(format!("select.alpha {} must lie in [0, 1]", s.alpha));
        }
        if !(s.a_min >= 0.0) || !(s.a_sat > 0.0) {
            return bad("select.a_min must be non-negative and select.a_sat positive".into());
        }
        self.describer().validate().map_err(|e| EngineError::Config(e.to_string()))?;
        let r = &self.reconcile;
        if !(r.delta_geo >= 0.0) || !(-1.0..=1.0).contains(&r.tau_feat) {
            return bad("reconcile.delta_geo must be non-negative and reconcile.tau_feat in [-1, 1]".into());
        }
        if !(self.regions.theta >= 0.0) {
            return bad("regions.theta must be non-negative".into());
        }
        if self.places.robot_box.iter().any(|v| !(*v > 0.0)) || !(self.places.max_side_m > 0.0) {
            return bad("places.robot_box and places.max_side_m must be positive".into());
        }
        if self.queue.capacity == 0 {
            return bad("queue.capacity must be at least 1".into());
        }
        Ok(())
    }
}
