use nalgebra::SVD;

use super::{Mat3, Vec3, ROTATION_TOLERANCE};
use crate::{Error, Result};

/// `p ↦ s·R·p + t`: uniform scale, proper rotation, translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    pub scale: f64,
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Default for SimilarityTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        Self { scale: 1.0, rotation: Mat3::identity(), translation: Vec3::zeros() }
    }

    /// Builds a transform, checking `scale > 0` and that `rotation` is proper.
    pub fn new(scale: f64, rotation: Mat3, translation: Vec3) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidInput(format!("scale must be positive, got {scale}")));
        }
        check_rotation(&rotation)?;
        Ok(Self { scale, rotation, translation })
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.scale * (self.rotation * p) + self.translation
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &SimilarityTransform) -> SimilarityTransform {
        SimilarityTransform {
            scale: self.scale * inner.scale,
            rotation: self.rotation * inner.rotation,
            translation: self.scale * (self.rotation * inner.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> SimilarityTransform {
        let rt = self.rotation.transpose();
        SimilarityTransform {
            scale: 1.0 / self.scale,
            rotation: rt,
            translation: -(rt * self.translation) / self.scale,
        }
    }

    /// Row-major flattening of the rotation.
    pub fn rotation_row_major(&self) -> [f64; 9] {
        let r = &self.rotation;
        [r[(0, 0)], r[(0, 1)], r[(0, 2)], r[(1, 0)], r[(1, 1)], r[(1, 2)], r[(2, 0)], r[(2, 1)], r[(2, 2)]]
    }
}

/// `s·R·p + t`.
pub fn apply_similarity(t: &SimilarityTransform, p: &Vec3) -> Vec3 {
    t.apply(p)
}

/// Rejects matrices farther than [`ROTATION_TOLERANCE`] from SO(3).
pub fn check_rotation(r: &Mat3) -> Result<()> {
    let residual = (r.transpose() * r - Mat3::identity()).abs().max();
    let det = r.determinant();
    if !residual.is_finite() || residual > ROTATION_TOLERANCE || (det - 1.0).abs() > ROTATION_TOLERANCE {
        return Err(Error::NotARotation { residual, det });
    }
    Ok(())
}

/// Geodesic distance on SO(3) in degrees, in `[0, 180]`.
pub fn rotation_geodesic_deg(ra: &Mat3, rb: &Mat3) -> Result<f64> {
    check_rotation(ra)?;
    check_rotation(rb)?;
    // atan2 of the skew and trace parts stays accurate near 0° and 180°,
    // where acos of the trace alone loses half the digits.
    let d = ra * rb.transpose();
    let skew = Vec3::new(d[(2, 1)] - d[(1, 2)], d[(0, 2)] - d[(2, 0)], d[(1, 0)] - d[(0, 1)]);
    Ok(skew.norm().atan2(d.trace() - 1.0).to_degrees())
}

/// Least-squares similarity transform mapping `source` onto `target`
/// (Umeyama's closed form). Minimizes `Σ ‖s·R·xᵢ + t − yᵢ‖²` over proper
/// rotations; with `with_scale == false` the scale is pinned to 1.
pub fn umeyama(source: &[Vec3], target: &[Vec3], with_scale: bool) -> Result<SimilarityTransform> {
    if source.len() != target.len() {
        return Err(Error::DegenerateInput(format!(
            "point lists differ in length ({} vs {})",
            source.len(),
            target.len()
        )));
    }
    let n = source.len();
    if n < 3 {
        return Err(Error::DegenerateInput(format!("need at least 3 points, got {n}")));
    }
    let inv_n = 1.0 / n as f64;
    let mean_src = source.iter().sum::<Vec3>() * inv_n;
    let mean_dst = target.iter().sum::<Vec3>() * inv_n;

    let mut cov = Mat3::zeros();
    let mut src_cov = Mat3::zeros();
    let mut src_var = 0.0;
    for (x, y) in source.iter().zip(target) {
        let dx = x - mean_src;
        let dy = y - mean_dst;
        cov += dy * dx.transpose();
        src_cov += dx * dx.transpose();
        src_var += dx.norm_squared();
    }
    cov *= inv_n;
    src_cov *= inv_n;
    src_var *= inv_n;

    // Rank of the source scatter: collinear (or coincident) sources pin down
    // at most one axis and leave the rotation about it free.
    let spread = src_cov.symmetric_eigenvalues();
    let mut spread = [spread[0], spread[1], spread[2]];
    spread.sort_by(|a, b| b.total_cmp(a));
    if !(spread[0] > 0.0) || spread[1] <= 1e-12 * spread[0] {
        return Err(Error::DegenerateInput("source points are collinear".into()));
    }

    let svd = SVD::new(cov, true, true);
    let u = svd.u.expect("SVD computed with U");
    let v_t = svd.v_t.expect("SVD computed with Vᵀ");
    let d = svd.singular_values;

    let mut sign = Vec3::new(1.0, 1.0, 1.0);
    if u.determinant() * v_t.determinant() < 0.0 {
        // Flip the axis of the smallest singular value.
        let (min_idx, _) = d.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &s)| {
            if s < acc.1 {
                (i, s)
            } else {
                acc
            }
        });
        sign[min_idx] = -1.0;
    }
    let rotation = u * Mat3::from_diagonal(&sign) * v_t;
    let scale = if with_scale { d.dot(&sign) / src_var } else { 1.0 };
    if with_scale && !(scale > 0.0) {
        return Err(Error::DegenerateInput(format!("non-positive scale estimate {scale}")));
    }
    let translation = mean_dst - scale * (rotation * mean_src);
    Ok(SimilarityTransform { scale, rotation, translation })
}
