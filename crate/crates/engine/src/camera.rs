//! Pinhole camera on the agent, tilted by a fixed pitch.
//!
//! Camera axes: x right, y down, z forward.

use sg4d_core::geom::{add, scale, sub, Vec3};

use crate::scene::CameraSpec;

#[derive(Debug, Clone, Copy)]
pub struct Camera {
    pub spec: CameraSpec,
    pub center: Vec3,
    x_axis: Vec3,
    y_axis: Vec3,
    z_axis: Vec3,
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl Camera {
    pub fn new(spec: CameraSpec, xy: [f64; 2], yaw: f64) -> Self {
        let (s, c) = yaw.sin_cos();
        let (sp, cp) = spec.pitch.sin_cos();
        let forward = [c, s, 0.0];
        let up = [0.0, 0.0, 1.0];
        Self {
            spec,
            center: [xy[0], xy[1], spec.height_m],
            x_axis: [s, -c, 0.0],
            y_axis: sub(scale(forward, sp), scale(up, cp)),
            z_axis: add(scale(forward, cp), scale(up, sp)),
        }
    }

    fn cx(&self) -> f64 {
        self.spec.width as f64 * 0.5
    }

    fn cy(&self) -> f64 {
        self.spec.height as f64 * 0.5
    }

    /// Pixel coordinates and depth; `None` behind the near plane.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64, f64)> {
        let d = sub(p, self.center);
        let z = dot(d, self.z_axis);
        if z < self.spec.near {
            return None;
        }
        let u = self.spec.fx * dot(d, self.x_axis) / z + self.cx();
        let v = self.spec.fy * dot(d, self.y_axis) / z + self.cy();
        Some((u, v, z))
    }

    /// Pixel rectangle `[u0, u1) × [v0, v1)` covered by the projection of an
    /// axis-aligned box, clipped to the image. `None` if any corner is
    /// behind the near plane or nothing remains.
    pub fn box_rect(&self, center: Vec3, half: Vec3) -> Option<[u32; 4]> {
        let (mut umin, mut umax, mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..8 {
            let corner = [
                center[0] + if i & 1 == 0 { -half[0] } else { half[0] },
                center[1] + if i & 2 == 0 { -half[1] } else { half[1] },
                center[2] + if i & 4 == 0 { -half[2] } else { half[2] },
            ];
            let (u, v, _) = self.project(corner)?;
            umin = umin.min(u);
            umax = umax.max(u);
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
        // pixels whose centers fall inside
        let (w, h) = (self.spec.width as f64, self.spec.height as f64);
        let u0 = (umin - 0.5).ceil().max(0.0);
        let u1 = ((umax - 0.5).floor() + 1.0).min(w);
        let v0 = (vmin - 0.5).ceil().max(0.0);
        let v1 = ((vmax - 0.5).floor() + 1.0).min(h);
        (u0 < u1 && v0 < v1).then_some([u0 as u32, v0 as u32, u1 as u32, v1 as u32])
    }

    /// Columns `[u0, u1)` of image row `v` whose rays hit the floor plane
    /// `z = 0` inside the rectangle `min..max`.
    pub fn floor_span(&self, v: u32, min: [f64; 2], max: [f64; 2]) -> Option<(u32, u32)> {
        let yv = (v as f64 + 0.5 - self.cy()) / self.spec.fy;
        // ray(u) = x_axis * (u + 0.5 - cx) / fx + y_axis * yv + z_axis
        let base = add(scale(self.y_axis, yv), self.z_axis);
        if base[2] >= -1e-12 {
            return None;
        }
        let t = -self.center[2] / base[2];
        // hit(u) = a + b * u over pixel index u
        let b = scale(self.x_axis, t / self.spec.fx);
        let a = add(add(self.center, scale(base, t)), scale(self.x_axis, t * (0.5 - self.cx()) / self.spec.fx));
        let (mut lo, mut hi) = (0.0f64, self.spec.width as f64 - 1.0);
        for k in 0..2 {
            if b[k].abs() < 1e-15 {
                if a[k] < min[k] || a[k] > max[k] {
                    return None;
                }
                continue;
            }
            let (s0, s1) = ((min[k] - a[k]) / b[k], (max[k] - a[k]) / b[k]);
            lo = lo.max(s0.min(s1));
            hi = hi.min(s0.max(s1));
        }
        let (u0, u1) = (lo.ceil(), hi.floor() + 1.0);
        (u0 < u1).then_some((u0 as u32, u1 as u32))
    }
}
