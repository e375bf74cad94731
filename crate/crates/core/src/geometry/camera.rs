use serde::{Deserialize, Serialize};

use super::Vec3;
use crate::{Error, Result};

/// Pinhole intrinsics. Pixel `(u, v)` covers `[u, u+1) × [v, v+1)` in the
/// continuous image plane, so its center sits at `(u + 0.5, v + 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let k = Self { fx, fy, cx, cy, width, height };
        k.validate()?;
        Ok(k)
    }

    /// Intrinsics of the synthetic CAMERA-style renders: 640×480, f = 577.5.
    pub fn tabletop() -> Self {
        Self { fx: 577.5, fy: 577.5, cx: 319.5, cy: 239.5, width: 640, height: 480 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.fx, self.fy, self.cx, self.cy].iter().all(|v| v.is_finite());
        if !finite || self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(Error::InvalidInput(format!("focal lengths must be positive: {self:?}")));
        }
        if !(0.0..self.width as f64).contains(&self.cx) || !(0.0..self.height as f64).contains(&self.cy) {
            return Err(Error::InvalidInput(format!(
                "principal point outside the image: {self:?}"
            )));
        }
        Ok(())
    }

    /// Single focal length used by the NOCE ratio.
    pub fn focal(&self) -> f64 {
        self.fx
    }

    /// Continuous image coordinates of a camera-frame point.
    pub fn project(&self, p: &Vec3) -> (f64, f64) {
        (self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy)
    }

    /// Camera-frame point on the ray through `(u, v)` at depth `depth`.
    pub fn backproject(&self, u: f64, v: f64, depth: f64) -> Vec3 {
        Vec3::new((u - self.cx) * depth / self.fx, (v - self.cy) * depth / self.fy, depth)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }
}
