use sg4d_core::Window;

use crate::score::{position_score, quality, size_score};
use crate::{SelectError, SelectParams};

/// Binary frame × fragment visibility. Rows are frames sorted by frame id,
/// columns are fragments sorted by track id.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityMatrix {
    pub frame_ids: Vec<u64>,
    pub fragment_ids: Vec<u64>,
    cells: Vec<bool>,
}

impl VisibilityMatrix {
    /// `cells` is row-major `n × m`. Ids default to `0..n` / `0..m`.
    pub fn from_dense(n: usize, m: usize, cells: Vec<bool>) -> Result<Self, SelectError> {
        if cells.len() != n * m {
            return Err(SelectError::Shape(format!("{} cells for {n}x{m}", cells.len())));
        }
        Ok(Self { frame_ids: (0..n as u64).collect(), fragment_ids: (0..m as u64).collect(), cells })
    }

    pub fn with_ids(mut self, frame_ids: Vec<u64>, fragment_ids: Vec<u64>) -> Result<Self, SelectError> {
        if frame_ids.len() != self.n() || fragment_ids.len() != self.m() {
            return Err(SelectError::Shape("id list length".into()));
        }
        self.frame_ids = frame_ids;
        self.fragment_ids = fragment_ids;
        Ok(self)
    }

    /// `v_ij = 1` iff track `j` has an observation in frame `i`.
    pub fn from_window(window: &Window) -> Self {
        let mut frame_ids: Vec<u64> = window.frames.iter().map(|f| f.frame_id).collect();
        frame_ids.sort_unstable();
        let mut fragment_ids: Vec<u64> = window.tracks.iter().map(|t| t.track_id).collect();
        fragment_ids.sort_unstable();
        let (n, m) = (frame_ids.len(), fragment_ids.len());
        let mut cells = vec![false; n * m];
        for track in &window.tracks {
            let j = fragment_ids.binary_search(&track.track_id).unwrap();
            for obs in &track.observations {
                if let Ok(i) = frame_ids.binary_search(&obs.frame_id) {
                    cells[i * m + j] = true;
                }
            }
        }
        Self { frame_ids, fragment_ids, cells }
    }

    pub fn n(&self) -> usize {
        self.frame_ids.len()
    }

    pub fn m(&self) -> usize {
        self.fragment_ids.len()
    }

    pub fn get(&self, frame: usize, fragment: usize) -> bool {
        self.cells[frame * self.m() + fragment]
    }

    pub fn row(&self, frame: usize) -> &[bool] {
        let m = self.m();
        &self.cells[frame * m..(frame + 1) * m]
    }
}

/// View quality per frame × fragment, zero wherever the fragment is not
/// visible.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityMatrix {
    n: usize,
    m: usize,
    q: Vec<f64>,
}

impl QualityMatrix {
    pub fn new(vis: &VisibilityMatrix, q: Vec<f64>) -> Result<Self, SelectError> {
        let (n, m) = (vis.n(), vis.m());
        if q.len() != n * m {
            return Err(SelectError::Shape(format!("{} qualities for {n}x{m}", q.len())));
        }
        for i in 0..n {
            for j in 0..m {
                let value = q[i * m + j];
                let reason = if !(0.0..=1.0).contains(&value) {
                    Some("outside [0, 1]")
                } else if !vis.get(i, j) && value != 0.0 {
                    Some("nonzero where not visible")
                } else {
                    None
                };
                if let Some(reason) = reason {
                    return Err(SelectError::BadQuality { frame: i, fragment: j, value, reason });
                }
            }
        }
        Ok(Self { n, m, q })
    }

    /// Scores each fragment's observation in each frame with the
    /// position/size heuristic.
    pub fn from_window(window: &Window, vis: &VisibilityMatrix, params: &SelectParams) -> Result<Self, SelectError> {
        let (n, m) = (vis.n(), vis.m());
        let mut q = vec![0.0; n * m];
        for (i, &frame_id) in vis.frame_ids.iter().enumerate() {
            let frame = window.frame(frame_id).expect("frame from window");
            for (j, &track_id) in vis.fragment_ids.iter().enumerate() {
                let Some(obs) = window.track(track_id).and_then(|t| t.observation_in(frame_id)) else {
                    continue;
                };
                let pos = position_score(obs.centroid_px, frame.width as f64, frame.height as f64)?;
                let size = size_score(obs.area_px as f64, params.a_min, params.a_sat);
                q[i * m + j] = quality(pos, size, params.alpha).clamp(0.0, 1.0);
            }
        }
        Self::new(vis, q)
    }

    pub fn get(&self, frame: usize, fragment: usize) -> f64 {
        self.q[frame * self.m + fragment]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }
}
