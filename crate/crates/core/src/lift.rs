//! Lifting a normalized mesh to a metric mesh in camera coordinates.
//!
//! The detection box center is back-projected to the predicted center depth
//! `Z`, which fixes the center of a camera-aligned 3D box whose inscribed
//! sphere has the predicted radius `R`. The similarity mapping the normalized
//! unit box `[-0.5, 0.5]³` onto that box is fitted from corner
//! correspondences and applied to every vertex.

use crate::geometry::{umeyama, BoundingBox2D, CameraIntrinsics, Frame, SimilarityTransform, TriangleMesh, Vec3};
use crate::{Error, Result};

/// Everything needed to place one normalized mesh in the camera frame.
#[derive(Debug, Clone)]
pub struct LiftInputs {
    pub mesh: TriangleMesh,
    pub bbox: BoundingBox2D,
    pub z_center: f64,
    pub radius: f64,
    pub intrinsics: CameraIntrinsics,
}

impl LiftInputs {
    pub fn validate(&self) -> Result<()> {
        if self.mesh.frame != Frame::Normalized {
            return Err(Error::InvalidInput("lift expects a mesh in the normalized frame".into()));
        }
        self.bbox.validate()?;
        self.intrinsics.validate()?;
        if !(self.z_center > 0.0) || !(self.radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "center depth {} and radius {} must be positive",
                self.z_center, self.radius
            )));
        }
        Ok(())
    }

    /// Same inputs with a new center depth and radius.
    pub fn with_scalars(&self, z_center: f64, radius: f64) -> LiftInputs {
        LiftInputs { z_center, radius, ..self.clone() }
    }
}

/// `((u − cx)·d/fx, (v − cy)·d/fy, d)`.
pub fn backproject_pixel(u: f64, v: f64, depth: f64, intrinsics: &CameraIntrinsics) -> Vec3 {
    intrinsics.backproject(u, v, depth)
}

fn unit_box_corners(center: Vec3, half: f64) -> Vec<Vec3> {
    (0..8)
        .map(|i| {
            let s = Vec3::new(
                if i & 1 == 0 { -1.0 } else { 1.0 },
                if i & 2 == 0 { -1.0 } else { 1.0 },
                if i & 4 == 0 { -1.0 } else { 1.0 },
            );
            center + half * s
        })
        .collect()
}

/// The normalized→camera similarity implied by the detection and `(Z, R)`.
pub fn lift_transform(input: &LiftInputs) -> Result<SimilarityTransform> {
    input.validate()?;
    let (u, v) = input.bbox.center();
    let center = backproject_pixel(u, v, input.z_center, &input.intrinsics);
    let source = unit_box_corners(Vec3::zeros(), 0.5);
    let target = unit_box_corners(center, input.radius);
    umeyama(&source, &target, true)
}

/// Metric mesh in camera coordinates; its bounding-sphere radius is `R`.
pub fn lift_to_metric(input: &LiftInputs) -> Result<TriangleMesh> {
    let t = lift_transform(input)?;
    Ok(input.mesh.transformed(&t, Frame::CameraMetric))
}
