//! Evaluation: 3D IoU and pose average precision, shape metrics on sampled
//! surfaces, and per-pixel depth errors.

mod ap;
mod depth;
mod iou;
mod report;
mod shape;

pub use ap::{
    ap_from_matching, detection_ap, match_detections, Criterion, DetectionRecord, Matching, MATCH_IOU_FLOOR,
};
pub use depth::{depth_metrics, DepthAccumulator, DepthMetrics, DELTA_THRESHOLDS};
pub use iou::{iou3d, iou3d_lattice, iou_axis_aligned, DEFAULT_IOU_RESOLUTION};
pub use report::{ap_curves, evaluate, CurvePoint, EvalConfig, EvalImage, MetricReport};
pub use shape::{chamfer_distance, normal_consistency, sample_surface, KdTree, SurfaceSample, DEFAULT_SURFACE_SAMPLES};

use std::collections::BTreeSet;

use crate::geometry::{check_rotation, Vec3};
use crate::{Category, Result, SimilarityTransform};

/// Categories whose rotation error ignores spin about the object +y axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryTable {
    pub symmetric: BTreeSet<Category>,
}

impl Default for SymmetryTable {
    fn default() -> Self {
        Self { symmetric: [Category::Bottle, Category::Bowl, Category::Can].into_iter().collect() }
    }
}

impl SymmetryTable {
    pub fn is_symmetric(&self, c: Category) -> bool {
        self.symmetric.contains(&c)
    }

    /// `(rotation error in degrees, translation error in cm)`.
    pub fn pose_errors(&self, pred: &SimilarityTransform, gt: &SimilarityTransform, category: Category) -> Result<(f64, f64)> {
        let cm = (pred.translation - gt.translation).norm() * 100.0;
        let deg = if self.is_symmetric(category) {
            check_rotation(&pred.rotation)?;
            check_rotation(&gt.rotation)?;
            let a = pred.rotation * Vec3::y();
            let b = gt.rotation * Vec3::y();
            a.dot(&b).clamp(-1.0, 1.0).acos().to_degrees()
        } else {
            crate::rotation_geodesic_deg(&pred.rotation, &gt.rotation)?
        };
        Ok((deg, cm))
    }
}

/// Pose errors with the default symmetry table.
pub fn pose_errors(pred: &SimilarityTransform, gt: &SimilarityTransform, category: Category) -> Result<(f64, f64)> {
    SymmetryTable::default().pose_errors(pred, gt, category)
}
