//! Pose and size from NOCS ↔ depth correspondences, plus sparse-depth refinement.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::{umeyama, CameraIntrinsics, OrientedBox3D, SimilarityTransform, TriangleMesh, Vec3};
use crate::lift::{lift_to_metric, LiftInputs};
use crate::raster::{render_depth, ImageGrid, Mask};
use crate::{Error, Result};

/// NOCS values live in `[0, 1]³`; subtracting this puts the object at the origin.
pub const NOCS_OFFSET: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacConfig {
    pub iterations: usize,
    /// Residual below which a correspondence counts as an inlier (meters).
    pub inlier_threshold: f64,
    pub min_sample: usize,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self { iterations: 256, inlier_threshold: 0.01, min_sample: 4, seed: 0 }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 || !(self.inlier_threshold > 0.0) || self.min_sample < 3 {
            return Err(Error::InvalidInput(format!("invalid RANSAC configuration {self:?}")));
        }
        Ok(())
    }
}

/// One NOCS point (object frame, centered) matched to one camera-frame point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub pixel: (usize, usize),
    pub nocs: Vec3,
    pub camera: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseDepthObservation {
    pub pixel: (usize, usize),
    pub depth: f64,
}

/// Similarity pose plus the object's tight box in its own frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseEstimate {
    pub transform: SimilarityTransform,
    /// Per-axis box extents in meters (object-frame extents × scale).
    pub size: Vec3,
    /// Center of the tight box in the centered object frame.
    pub box_center: Vec3,
    pub inlier_count: usize,
    pub inlier_ratio: f64,
}

impl PoseEstimate {
    /// Oriented 3D box in camera space.
    pub fn box3d(&self) -> Result<OrientedBox3D> {
        OrientedBox3D::new(
            self.transform.apply(&self.box_center),
            self.transform.rotation,
            (self.size / 2.0).map(|h| h.max(1e-12)),
        )
    }
}

/// Pairs every pixel valid in the NOCS map, the depth map and the mask.
pub fn build_correspondences(
    nocs: &ImageGrid,
    depth: &ImageGrid,
    mask: &Mask,
    intrinsics: &CameraIntrinsics,
) -> Result<Vec<Correspondence>> {
    if !nocs.same_shape(depth) || nocs.width() != mask.width || nocs.height() != mask.height {
        return Err(Error::InvalidInput("NOCS map, depth map and mask differ in size".into()));
    }
    if nocs.channels() != 3 || depth.channels() != 1 {
        return Err(Error::InvalidInput("expected a 3-channel NOCS map and a 1-channel depth map".into()));
    }
    let mut out = Vec::new();
    for (u, v) in mask.pixels() {
        let (Some(n), Some(d)) = (nocs.get(u, v), depth.value(u, v)) else { continue };
        let nocs_point = Vec3::new(n[0] as f64, n[1] as f64, n[2] as f64).add_scalar(-NOCS_OFFSET);
        let camera = intrinsics.backproject(u as f64 + 0.5, v as f64 + 0.5, d);
        out.push(Correspondence { pixel: (u, v), nocs: nocs_point, camera });
    }
    if out.is_empty() {
        return Err(Error::NoCorrespondences);
    }
    Ok(out)
}

struct Hypothesis {
    iteration: usize,
    inliers: usize,
    residual_sum: f64,
}

impl Hypothesis {
    fn mean_residual(&self) -> f64 {
        self.residual_sum / self.inliers.max(1) as f64
    }

    /// Most inliers, then lower mean inlier residual, then earlier iteration.
    fn better_than(&self, other: &Hypothesis) -> bool {
        (self.inliers, other.mean_residual(), other.iteration) > (other.inliers, self.mean_residual(), self.iteration)
    }
}

fn iteration_rng(seed: u64, iteration: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration as u64);
    rng
}

fn fit_sample(corrs: &[Correspondence], config: &RansacConfig, iteration: usize) -> Option<SimilarityTransform> {
    let mut rng = iteration_rng(config.seed, iteration);
    let idx = sample(&mut rng, corrs.len(), config.min_sample);
    let (src, dst): (Vec<Vec3>, Vec<Vec3>) = idx.iter().map(|i| (corrs[i].nocs, corrs[i].camera)).unzip();
    umeyama(&src, &dst, true).ok()
}

fn residual(t: &SimilarityTransform, c: &Correspondence) -> f64 {
    (t.apply(&c.nocs) - c.camera).norm()
}

fn tight_box(points: impl Iterator<Item = Vec3>) -> Option<(Vec3, Vec3)> {
    points.fold(None, |acc, p| match acc {
        None => Some((p, p)),
        Some((lo, hi)) => Some((lo.inf(&p), hi.sup(&p))),
    })
}

fn distinct_per_axis_at_least(points: &[Vec3], k: usize) -> bool {
    (0..3).all(|axis| {
        let mut vals: Vec<f64> = points.iter().map(|p| p[axis]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        vals.len() >= k
    })
}

/// RANSAC over minimal Umeyama fits, then a refit on the winner's inliers.
///
/// Iteration `i` draws its sample from its own ChaCha substream
/// `(seed, i)`, so the result does not depend on evaluation order.
pub fn solve_pose(corrs: &[Correspondence], config: &RansacConfig) -> Result<PoseEstimate> {
    config.validate()?;
    if corrs.len() < config.min_sample {
        return Err(Error::DegenerateInput(format!(
            "{} correspondences, at least {} required",
            corrs.len(),
            config.min_sample
        )));
    }
    let thresh = config.inlier_threshold;
    let best = (0..config.iterations)
        .into_par_iter()
        .filter_map(|i| {
            let model = fit_sample(corrs, config, i)?;
            let (inliers, residual_sum) = corrs.iter().fold((0usize, 0.0), |(n, s), c| {
                let r = residual(&model, c);
                if r < thresh { (n + 1, s + r) } else { (n, s) }
            });
            Some(Hypothesis { iteration: i, inliers, residual_sum })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|a, b| if b.better_than(&a) { b } else { a });

    let best = match best {
        Some(h) if h.inliers >= config.min_sample => h,
        other => {
            return Err(Error::NoConsensus {
                best: other.map_or(0, |h| h.inliers),
                required: config.min_sample,
            })
        }
    };
    let model = fit_sample(corrs, config, best.iteration).expect("winning sample was fit before");
    let inliers: Vec<&Correspondence> = corrs.iter().filter(|c| residual(&model, c) < thresh).collect();
    let (src, dst): (Vec<Vec3>, Vec<Vec3>) = inliers.iter().map(|c| (c.nocs, c.camera)).unzip();
    let transform = umeyama(&src, &dst, true)?;

    let box_points = if distinct_per_axis_at_least(&src, 3) {
        src
    } else {
        corrs.iter().map(|c| c.nocs).collect()
    };
    let (lo, hi) = tight_box(box_points.into_iter()).expect("at least min_sample inliers");
    Ok(PoseEstimate {
        transform,
        size: (hi - lo) * transform.scale,
        box_center: 0.5 * (lo + hi),
        inlier_count: best.inliers,
        inlier_ratio: best.inliers as f64 / corrs.len() as f64,
    })
}

/// Shifts `Z` by the observed-minus-rendered depth at one pixel and rescales
/// `R` proportionally to the new `Z`.
pub fn refine_with_sparse_depth(
    z_center: f64,
    radius: f64,
    rendered_depth: &ImageGrid,
    obs: &SparseDepthObservation,
) -> Result<(f64, f64)> {
    refine_with_sparse_depths(z_center, radius, rendered_depth, std::slice::from_ref(obs))
}

/// Multi-pixel variant: the `Z` offset is the median of the per-pixel
/// differences over the observations the render covers.
pub fn refine_with_sparse_depths(
    z_center: f64,
    radius: f64,
    rendered_depth: &ImageGrid,
    obs: &[SparseDepthObservation],
) -> Result<(f64, f64)> {
    if !(z_center > 0.0) || !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("center {z_center} and radius {radius} must be positive")));
    }
    let mut diffs = Vec::with_capacity(obs.len());
    for o in obs {
        if !(o.depth > 0.0) {
            return Err(Error::InvalidInput(format!("observed depth must be positive, got {}", o.depth)));
        }
        match rendered_depth.value(o.pixel.0, o.pixel.1) {
            Some(d) => diffs.push(o.depth - d),
            None if obs.len() == 1 => return Err(Error::PixelNotCovered { u: o.pixel.0, v: o.pixel.1 }),
            None => {}
        }
    }
    if diffs.is_empty() {
        let (u, v) = obs.first().map_or((0, 0), |o| o.pixel);
        return Err(Error::PixelNotCovered { u, v });
    }
    diffs.sort_by(f64::total_cmp);
    let m = diffs.len();
    let offset = if m % 2 == 1 { diffs[m / 2] } else { 0.5 * (diffs[m / 2 - 1] + diffs[m / 2]) };
    let z = z_center + offset;
    if !(z > 0.0) {
        return Err(Error::InvalidInput(format!("refined center depth {z} is not in front of the camera")));
    }
    Ok((z, radius * z / z_center))
}

/// Output of the full per-object pipeline.
#[derive(Debug, Clone)]
pub struct ObjectEstimate {
    pub pose: PoseEstimate,
    /// Final metric mesh in camera coordinates.
    pub mesh: TriangleMesh,
    /// Final rendered depth map.
    pub depth: ImageGrid,
    /// Center depth and radius after optional refinement.
    pub z_center: f64,
    pub radius: f64,
}

/// lift → render → (refine → re-lift → re-render) → correspondences → RANSAC.
///
/// The reported box is the tight box of the whole final mesh expressed in the
/// solved object frame, so hidden surfaces contribute to the size.
pub fn estimate_object(
    lift: &LiftInputs,
    nocs: &ImageGrid,
    mask: &Mask,
    config: &RansacConfig,
    observations: &[SparseDepthObservation],
) -> Result<ObjectEstimate> {
    let k = lift.intrinsics;
    let mut current = lift.clone();
    let mut mesh = lift_to_metric(&current)?;
    let mut depth = render_depth(&mesh, &k)?;
    if !observations.is_empty() {
        let (z, r) = refine_with_sparse_depths(current.z_center, current.radius, &depth, observations)?;
        current = current.with_scalars(z, r);
        mesh = lift_to_metric(&current)?;
        depth = render_depth(&mesh, &k)?;
    }
    let corrs = build_correspondences(nocs, &depth, mask, &k)?;
    let mut pose = solve_pose(&corrs, config)?;

    let to_object = pose.transform.inverse();
    if let Some((lo, hi)) = tight_box(mesh.vertices.iter().map(|v| to_object.apply(v))) {
        pose.box_center = 0.5 * (lo + hi);
        pose.size = (hi - lo) * pose.transform.scale;
    }
    Ok(ObjectEstimate { pose, mesh, depth, z_center: current.z_center, radius: current.radius })
}
