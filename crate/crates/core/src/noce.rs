//! Normalized object center estimation.
//!
//! A crop resized to a fixed patch loses the apparent size of the object, so
//! the center depth is regressed in a normalized form that folds the resize
//! ratio `τ = H_o / H_patch` and the focal length back in:
//! `Z_noce = Z·τ / f`. The radius is regressed relative to depth: `R = r·Z`.

use crate::geometry::{BoundingBox2D, CameraIntrinsics};
use crate::{Error, Result};

/// Patch side the shape branch consumes.
pub const DEFAULT_PATCH_SIZE: f64 = 192.0;

/// Normalized center/radius pair for one detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoceScalars {
    pub z_noce: f64,
    pub r_norm: f64,
    pub tau: f64,
    pub h_patch: f64,
}

impl NoceScalars {
    /// Normalizes a metric `(Z, R)` pair for the given detection.
    pub fn from_metric(
        z_center: f64,
        radius: f64,
        bbox: &BoundingBox2D,
        h_patch: f64,
        intrinsics: &CameraIntrinsics,
    ) -> Result<Self> {
        Ok(Self {
            z_noce: noce_normalize(z_center, bbox, h_patch, intrinsics)?,
            r_norm: radius_normalize(radius, z_center)?,
            tau: resize_ratio(bbox, h_patch)?,
            h_patch,
        })
    }

    /// Restores metric `(Z, R)`.
    pub fn to_metric(&self, intrinsics: &CameraIntrinsics) -> Result<(f64, f64)> {
        if !(self.tau > 0.0) {
            return Err(Error::InvalidInput(format!("resize ratio must be positive, got {}", self.tau)));
        }
        let z = self.z_noce * intrinsics.focal() / self.tau;
        Ok((z, radius_denormalize(self.r_norm, z)?))
    }
}

/// `τ = H_o / H_patch` with `H_o` the longer bbox side.
pub fn resize_ratio(bbox: &BoundingBox2D, h_patch: f64) -> Result<f64> {
    bbox.validate()?;
    if !(h_patch > 0.0) {
        return Err(Error::InvalidInput(format!("patch size must be positive, got {h_patch}")));
    }
    Ok(bbox.longer_side() / h_patch)
}

pub fn noce_normalize(
    z_center: f64,
    bbox: &BoundingBox2D,
    h_patch: f64,
    intrinsics: &CameraIntrinsics,
) -> Result<f64> {
    if !(z_center > 0.0) {
        return Err(Error::InvalidInput(format!("object center must be in front of the camera, got Z={z_center}")));
    }
    let tau = resize_ratio(bbox, h_patch)?;
    Ok(z_center * tau / intrinsics.focal())
}

pub fn noce_denormalize(
    z_noce: f64,
    bbox: &BoundingBox2D,
    h_patch: f64,
    intrinsics: &CameraIntrinsics,
) -> Result<f64> {
    if !(z_noce > 0.0) {
        return Err(Error::InvalidInput(format!("normalized center must be positive, got {z_noce}")));
    }
    let tau = resize_ratio(bbox, h_patch)?;
    Ok(z_noce * intrinsics.focal() / tau)
}

pub fn radius_denormalize(r_norm: f64, z_center: f64) -> Result<f64> {
    if !(r_norm > 0.0) || !(z_center > 0.0) {
        return Err(Error::InvalidInput(format!("radius {r_norm} and center {z_center} must be positive")));
    }
    Ok(r_norm * z_center)
}

pub fn radius_normalize(radius: f64, z_center: f64) -> Result<f64> {
    if !(radius > 0.0) || !(z_center > 0.0) {
        return Err(Error::InvalidInput(format!("radius {radius} and center {z_center} must be positive")));
    }
    Ok(radius / z_center)
}
