use nalgebra::{Quaternion, UnitQuaternion};
use serde::{Deserialize, Serialize};
use sg4d_core::geom::{dist, lerp, Vec3};
use sg4d_core::Pose;
use sg4d_scenegraph::{AgentPose, SceneGraph4D};

use crate::QueryError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPose {
    pub t: f64,
    pub position: Vec3,
    /// Yaw in radians.
    pub heading: f64,
    /// `[w, x, y, z]`.
    pub orientation: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReply {
    pub poses: Vec<TrajectoryPose>,
    /// Start and end resolve to the same recorded sample.
    pub degenerate: bool,
}

fn nearest_sample(poses: &[AgentPose], p: Vec3) -> usize {
    let mut best = 0;
    for (i, s) in poses.iter().enumerate() {
        if dist(s.pose.position, p) < dist(poses[best].pose.position, p) {
            best = i;
        }
    }
    best
}

fn quat(p: &Pose) -> UnitQuaternion<f64> {
    let [w, x, y, z] = p.orientation;
    UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z))
}

fn out(t: f64, position: Vec3, q: UnitQuaternion<f64>) -> TrajectoryPose {
    let c = q.quaternion().coords;
    TrajectoryPose { t, position, heading: q.euler_angles().2, orientation: [c.w, c.x, c.y, c.z] }
}

/// `n` poses equally spaced by arc length along the recorded trajectory
/// between the samples nearest `start` and `end` (earliest on ties),
/// endpoints included. Runs backwards in time when `end` was visited
/// first. Orientation is slerped between neighboring samples.
pub fn agent_trajectory(graph: &SceneGraph4D, start: Vec3, end: Vec3, n: usize) -> Result<TrajectoryReply, QueryError> {
    let poses = &graph.agent_poses;
    if poses.is_empty() {
        return Err(QueryError::NoPoses);
    }
    if n == 0 {
        return Err(QueryError::BadArgs("n must be at least 1".into()));
    }
    let (i, j) = (nearest_sample(poses, start), nearest_sample(poses, end));
    if i == j {
        let p = &poses[i];
        return Ok(TrajectoryReply { poses: vec![out(p.t.0, p.pose.position, quat(&p.pose))], degenerate: true });
    }
    let seg: Vec<&AgentPose> = if i < j { poses[i..=j].iter().collect() } else { poses[j..=i].iter().rev().collect() };
    let mut arc = vec![0.0];
    for w in seg.windows(2) {
        arc.push(arc.last().unwrap() + dist(w[0].pose.position, w[1].pose.position));
    }
    let total = *arc.last().unwrap();
    // a stationary stretch falls back to even spacing over samples
    if total <= 0.0 {
        arc = (0..seg.len()).map(|k| k as f64).collect();
    }
    let total = *arc.last().unwrap();

    let mut result = Vec::with_capacity(n);
    let mut k = 0;
    for step in 0..n {
        let s = if n == 1 { 0.0 } else { total * step as f64 / (n - 1) as f64 };
        while k + 2 < arc.len() && arc[k + 1] < s {
            k += 1;
        }
        let span = arc[k + 1] - arc[k];
        let f = if span > 0.0 { ((s - arc[k]) / span).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = (seg[k], seg[k + 1]);
        let (qa, qb) = (quat(&a.pose), quat(&b.pose));
        let q = qa.try_slerp(&qb, f, 1e-9).unwrap_or(if f < 0.5 { qa } else { qb });
        let t = a.t.0 + (b.t.0 - a.t.0) * f;
        result.push(out(t, lerp(a.pose.position, b.pose.position, f), q));
    }
    Ok(TrajectoryReply { poses: result, degenerate: false })
}
