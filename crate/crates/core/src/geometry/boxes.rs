use serde::{Deserialize, Serialize};

use super::{check_rotation, Mat3, Vec3};
use crate::{Error, Result};

/// Axis-aligned image box: top-left corner plus extent, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox2D {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox2D {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        let b = Self { x, y, w, h };
        b.validate()?;
        Ok(b)
    }

    /// Box of the given extent centered on `(u, v)`.
    pub fn centered(u: f64, v: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(u - 0.5 * w, v - 0.5 * h, w, h)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite());
        if !finite || self.w <= 0.0 || self.h <= 0.0 {
            return Err(Error::InvalidBox(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + 0.5 * self.w, self.y + 0.5 * self.h)
    }

    /// `H_o`: the side that governs the square patch resize.
    pub fn longer_side(&self) -> f64 {
        self.w.max(self.h)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x, self.y, self.w, self.h]
    }
}

/// Box with arbitrary orientation in camera space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox3D {
    pub center: Vec3,
    pub rotation: Mat3,
    pub half_extents: Vec3,
}

impl OrientedBox3D {
    pub fn new(center: Vec3, rotation: Mat3, half_extents: Vec3) -> Result<Self> {
        check_rotation(&rotation)?;
        if half_extents.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "box half-extents must be positive: {half_extents:?}"
            )));
        }
        Ok(Self { center, rotation, half_extents })
    }

    pub fn axis_aligned(center: Vec3, half_extents: Vec3) -> Result<Self> {
        Self::new(center, Mat3::identity(), half_extents)
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.x * self.half_extents.y * self.half_extents.z
    }

    /// Inclusive containment test in the box's local frame.
    pub fn contains(&self, p: &Vec3) -> bool {
        let local = self.rotation.transpose() * (p - self.center);
        (0..3).all(|i| local[i].abs() <= self.half_extents[i])
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let mut out = [Vec3::zeros(); 8];
        for (i, c) in out.iter_mut().enumerate() {
            let sign = Vec3::new(
                if i & 1 == 0 { -1.0 } else { 1.0 },
                if i & 2 == 0 { -1.0 } else { 1.0 },
                if i & 4 == 0 { -1.0 } else { 1.0 },
            );
            *c = self.center + self.rotation * sign.component_mul(&self.half_extents);
        }
        out
    }

    /// Axis-aligned bounds `(min, max)` of the box.
    pub fn aabb(&self) -> (Vec3, Vec3) {
        // |R| * h gives the world-axis half extents.
        let abs_r = self.rotation.abs();
        let reach = abs_r * self.half_extents;
        (self.center - reach, self.center + reach)
    }

    pub fn is_axis_aligned(&self) -> bool {
        self.rotation == Mat3::identity()
    }
}
