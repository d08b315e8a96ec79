use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::BBox;

/// Pinhole camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub position: [f32; 3],
    pub target: [f32; 3],
    #[serde(default = "default_up")]
    pub up: [f32; 3],
    /// Vertical field of view in degrees.
    pub fov_deg: f32,
    pub width: u32,
    pub height: u32,
}

fn default_up() -> [f32; 3] {
    [0.0, 1.0, 0.0]
}

pub(crate) fn sub(a: [f32; 3], b: [f32; 3]) -> [f32; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: [f32; 3], b: [f32; 3]) -> f32 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f32; 3], b: [f32; 3]) -> [f32; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn normalize(a: [f32; 3]) -> [f32; 3] {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Camera frame: unit forward, right and up vectors plus the image-plane
/// half extents at unit distance.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CameraBasis {
    pub origin: [f32; 3],
    pub forward: [f32; 3],
    pub right: [f32; 3],
    pub up: [f32; 3],
    pub half_w: f32,
    pub half_h: f32,
}

impl Camera {
    /// Camera on a sphere of `radius` around `center`, looking at it.
    /// Yaw rotates about +y starting from +z, pitch lifts toward +y.
    pub fn orbit(
        center: [f32; 3],
        radius: f32,
        yaw_deg: f32,
        pitch_deg: f32,
        fov_deg: f32,
        width: u32,
        height: u32,
    ) -> Self {
        let (yaw, pitch) = (yaw_deg.to_radians(), pitch_deg.to_radians());
        let offset = [
            radius * pitch.cos() * yaw.sin(),
            radius * pitch.sin(),
            radius * pitch.cos() * yaw.cos(),
        ];
        Camera {
            position: [
                center[0] + offset[0],
                center[1] + offset[1],
                center[2] + offset[2],
            ],
            target: center,
            up: default_up(),
            fov_deg,
            width,
            height,
        }
    }

    /// Orbit camera aimed at the center of `bbox`.
    pub fn orbit_bbox(
        bbox: &BBox,
        radius: f32,
        yaw_deg: f32,
        pitch_deg: f32,
        width: u32,
        height: u32,
    ) -> Self {
        Camera::orbit(
            bbox.center(),
            radius,
            yaw_deg,
            pitch_deg,
            40.0,
            width,
            height,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(Error::invalid(format!(
                "field of view {} not in (0, 180)",
                self.fov_deg
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("image size must be non-zero"));
        }
        let all = self.position.iter().chain(&self.target).chain(&self.up);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::invalid("camera vectors must be finite"));
        }
        let f = sub(self.target, self.position);
        if dot(f, f) == 0.0 {
            return Err(Error::invalid("camera position equals target"));
        }
        let r = cross(normalize(f), self.up);
        if dot(r, r) < 1e-12 {
            return Err(Error::invalid(
                "camera up vector is parallel to the view direction",
            ));
        }
        Ok(())
    }

    pub(crate) fn basis(&self) -> Result<CameraBasis> {
        self.validate()?;
        let forward = normalize(sub(self.target, self.position));
        let right = normalize(cross(forward, self.up));
        let up = cross(right, forward);
        let half_h = (self.fov_deg.to_radians() * 0.5).tan();
        let half_w = half_h * self.width as f32 / self.height as f32;
        Ok(CameraBasis {
            origin: self.position,
            forward,
            right,
            up,
            half_w,
            half_h,
        })
    }
}

impl CameraBasis {
    /// Unit direction through the center of pixel (`px`, `py`), row 0 at the top.
    pub fn ray(&self, px: u32, py: u32, width: u32, height: u32) -> [f32; 3] {
        let sx = (2.0 * (px as f32 + 0.5) / width as f32 - 1.0) * self.half_w;
        let sy = (1.0 - 2.0 * (py as f32 + 0.5) / height as f32) * self.half_h;
        normalize([
            self.forward[0] + sx * self.right[0] + sy * self.up[0],
            self.forward[1] + sx * self.right[1] + sy * self.up[1],
            self.forward[2] + sx * self.right[2] + sy * self.up[2],
        ])
    }
}
