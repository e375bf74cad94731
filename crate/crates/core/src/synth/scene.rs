use nalgebra::UnitQuaternion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{make_category_mesh, ShapeParams};
use crate::geometry::{BoundingBox2D, CameraIntrinsics, Frame, OrientedBox3D, SimilarityTransform, TriangleMesh, Vec3};
use crate::pose::NOCS_OFFSET;
use crate::raster::{rasterize, ImageGrid, Mask};
use crate::{Category, Error, Result};

/// Sampling ranges for synthetic scenes.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub intrinsics: CameraIntrinsics,
    pub min_objects: usize,
    pub max_objects: usize,
    /// Range of the bounding-sphere center depth (meters).
    pub z_range: (f64, f64),
    /// Objects with fewer visible pixels are dropped from the scene.
    pub min_visible_pixels: usize,
    pub subdivisions: usize,
    /// Relative jitter applied to each shape parameter.
    pub shape_jitter: f64,
    /// Margin kept between the projected sphere and the image border (pixels).
    pub border_px: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            intrinsics: CameraIntrinsics::tabletop(),
            min_objects: 1,
            max_objects: 3,
            z_range: (0.6, 3.0),
            min_visible_pixels: 64,
            subdivisions: 4,
            shape_jitter: 0.15,
            border_px: 1.0,
        }
    }
}

/// Metric bounding-sphere radius range per category (meters).
pub fn radius_range(category: Category) -> (f64, f64) {
    match category {
        Category::Bottle => (0.08, 0.15),
        Category::Bowl => (0.07, 0.12),
        Category::Camera => (0.06, 0.10),
        Category::Can => (0.05, 0.09),
        Category::Laptop => (0.15, 0.25),
        Category::Mug => (0.05, 0.09),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub category: Category,
    pub params: ShapeParams,
    /// Maps the normalized canonical mesh into the camera frame.
    pub gt_pose: SimilarityTransform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub seed: u64,
    pub objects: Vec<SceneObject>,
    pub intrinsics: CameraIntrinsics,
    pub subdivisions: usize,
}

/// Ground truth for one visible object.
#[derive(Debug, Clone)]
pub struct ObjectTruth {
    pub category: Category,
    pub gt_pose: SimilarityTransform,
    /// Normalized mesh in its canonical orientation.
    pub canonical_mesh: TriangleMesh,
    /// Normalized mesh rotated into the camera orientation (`R·canonical`),
    /// i.e. what a shape predictor outputs for this view.
    pub view_mesh: TriangleMesh,
    pub metric_mesh: TriangleMesh,
    /// Depth of the visible surface, valid inside the mask.
    pub depth: ImageGrid,
    /// NOCS coordinates (canonical + 0.5), valid inside the mask.
    pub nocs: ImageGrid,
    pub mask: Mask,
    /// Smallest box centered on the projected sphere center covering the mask.
    pub bbox: BoundingBox2D,
    pub z_center: f64,
    pub radius: f64,
    /// Tight canonical box: center in the object frame and metric extents.
    pub box_center: Vec3,
    pub size: Vec3,
}

impl ObjectTruth {
    pub fn box3d(&self) -> Result<OrientedBox3D> {
        OrientedBox3D::new(self.gt_pose.apply(&self.box_center), self.gt_pose.rotation, self.size / 2.0)
    }
}

fn uniform_rotation(rng: &mut ChaCha8Rng) -> nalgebra::Matrix3<f64> {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            let q = nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]);
            return *UnitQuaternion::from_quaternion(q).to_rotation_matrix().matrix();
        }
    }
}

/// Pixel interval covered by the sphere along one image axis.
fn projected_interval(lateral: f64, z: f64, radius: f64, focal: f64, principal: f64) -> Option<(f64, f64)> {
    let rho = lateral.hypot(z);
    if radius >= rho {
        return None;
    }
    let alpha = lateral.atan2(z);
    let beta = (radius / rho).asin();
    if alpha + beta >= std::f64::consts::FRAC_PI_2 || alpha - beta <= -std::f64::consts::FRAC_PI_2 {
        return None;
    }
    Some((focal * (alpha - beta).tan() + principal, focal * (alpha + beta).tan() + principal))
}

/// Whether the whole sphere projects inside the image with the given margin.
pub fn sphere_in_view(center: &Vec3, radius: f64, k: &CameraIntrinsics, border: f64) -> bool {
    let inside = |iv: Option<(f64, f64)>, extent: usize| {
        iv.is_some_and(|(lo, hi)| lo >= border && hi <= extent as f64 - border)
    };
    center.z - radius > 0.0
        && inside(projected_interval(center.x, center.z, radius, k.fx, k.cx), k.width)
        && inside(projected_interval(center.y, center.z, radius, k.fy, k.cy), k.height)
}

fn jittered(base: ShapeParams, jitter: f64, rng: &mut ChaCha8Rng) -> ShapeParams {
    let mut j = |x: f64| if jitter > 0.0 { x * (1.0 + rng.random_range(-jitter..=jitter)) } else { x };
    ShapeParams { width: j(base.width), height: j(base.height), depth: j(base.depth) }
}

/// Draws categories, shapes and poses; objects are non-overlapping spheres
/// fully inside the view.
pub fn sample_scene(seed: u64, cfg: &SceneConfig) -> SceneSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = cfg.intrinsics;
    let count = rng.random_range(cfg.min_objects..=cfg.max_objects.max(cfg.min_objects));
    let mut objects: Vec<SceneObject> = Vec::new();
    for _ in 0..count {
        let category = Category::ALL[rng.random_range(0..Category::ALL.len())];
        let params = jittered(ShapeParams::default_for(category), cfg.shape_jitter, &mut rng);
        let (rlo, rhi) = radius_range(category);
        let radius = rng.random_range(rlo..=rhi);
        let rotation = uniform_rotation(&mut rng);
        for _attempt in 0..200 {
            let z = rng.random_range(cfg.z_range.0..=cfg.z_range.1);
            let u = rng.random_range(0.0..k.width as f64);
            let v = rng.random_range(0.0..k.height as f64);
            let center = k.backproject(u, v, z);
            let clear = objects
                .iter()
                .all(|o| (o.gt_pose.translation - center).norm() > o.gt_pose.scale / 2.0 + radius);
            if clear && sphere_in_view(&center, radius, &k, cfg.border_px) {
                let pose = SimilarityTransform::new(2.0 * radius, rotation, center).expect("valid pose");
                objects.push(SceneObject { category, params, gt_pose: pose });
                break;
            }
        }
    }
    SceneSpec { seed, objects, intrinsics: k, subdivisions: cfg.subdivisions }
}

fn centered_cover(mask: &Mask, center: (f64, f64)) -> Result<BoundingBox2D> {
    let (mut hw, mut hh) = (0.0f64, 0.0f64);
    for (u, v) in mask.pixels() {
        let (u, v) = (u as f64, v as f64);
        hw = hw.max((u - center.0).abs()).max((u + 1.0 - center.0).abs());
        hh = hh.max((v - center.1).abs()).max((v + 1.0 - center.1).abs());
    }
    BoundingBox2D::centered(center.0, center.1, 2.0 * hw, 2.0 * hh)
}

/// Renders every object with mutual occlusion. Fully hidden objects yield
/// `EmptyRender` in their slot.
pub fn render_ground_truth(scene: &SceneSpec) -> Result<Vec<Result<ObjectTruth>>> {
    let k = scene.intrinsics;
    let mut canonical = Vec::with_capacity(scene.objects.len());
    let mut metric = Vec::with_capacity(scene.objects.len());
    for o in &scene.objects {
        let m = make_category_mesh(o.category, &o.params, scene.subdivisions)?;
        metric.push(m.transformed(&o.gt_pose, Frame::CameraMetric));
        canonical.push(m);
    }
    let refs: Vec<&TriangleMesh> = metric.iter().collect();
    let (merged, owner) = TriangleMesh::merge(&refs, Frame::CameraMetric);
    let nocs_attr: Vec<Vec3> =
        canonical.iter().flat_map(|m| m.vertices.iter().map(|v| v.add_scalar(NOCS_OFFSET))).collect();
    let frags = rasterize(&merged, &k)?;

    let n = scene.objects.len();
    let mut depth = vec![ImageGrid::new_invalid(k.width, k.height, 1); n];
    let mut nocs = vec![ImageGrid::new_invalid(k.width, k.height, 3); n];
    let mut mask = vec![Mask::new(k.width, k.height); n];
    for v in 0..k.height {
        for u in 0..k.width {
            let Some((face, d, w)) = frags.at(u, v) else { continue };
            let o = owner[face] as usize;
            let f = merged.faces[face];
            let a = w[0] * nocs_attr[f[0] as usize] + w[1] * nocs_attr[f[1] as usize] + w[2] * nocs_attr[f[2] as usize];
            depth[o].set(u, v, &[d as f32]);
            nocs[o].set(u, v, &[a.x as f32, a.y as f32, a.z as f32]);
            mask[o].set(u, v, true);
        }
    }

    let mut out = Vec::with_capacity(n);
    for (i, o) in scene.objects.iter().enumerate() {
        if mask[i].count() == 0 {
            out.push(Err(Error::EmptyRender));
            continue;
        }
        let pose = o.gt_pose;
        let center = k.project(&pose.translation);
        let bbox = centered_cover(&mask[i], center)?;
        let (lo, hi) = canonical[i].aabb().expect("non-empty mesh");
        let view_rotation = SimilarityTransform::new(1.0, pose.rotation, Vec3::zeros())?;
        out.push(Ok(ObjectTruth {
            category: o.category,
            gt_pose: pose,
            view_mesh: canonical[i].transformed(&view_rotation, Frame::Normalized),
            canonical_mesh: canonical[i].clone(),
            metric_mesh: metric[i].clone(),
            depth: depth[i].clone(),
            nocs: nocs[i].clone(),
            mask: mask[i].clone(),
            bbox,
            z_center: pose.translation.z,
            radius: pose.scale / 2.0,
            box_center: 0.5 * (lo + hi),
            size: (hi - lo) * pose.scale,
        }));
    }
    Ok(out)
}

/// Samples a scene and drops objects that end up with too few visible pixels,
/// re-rendering until every remaining object is visible enough. A scene left
/// empty is redrawn from a derived seed.
pub fn generate_scene(seed: u64, cfg: &SceneConfig) -> Result<(SceneSpec, Vec<ObjectTruth>)> {
    let mut draw = seed;
    loop {
        let mut scene = sample_scene(draw, cfg);
        scene.seed = seed;
        loop {
            let rendered = render_ground_truth(&scene)?;
            let keep: Vec<bool> = rendered
                .iter()
                .map(|r| r.as_ref().is_ok_and(|t| t.mask.count() >= cfg.min_visible_pixels))
                .collect();
            if keep.iter().all(|k| *k) {
                let truths = rendered.into_iter().collect::<Result<Vec<_>>>()?;
                if truths.is_empty() {
                    break;
                }
                return Ok((scene, truths));
            }
            let mut it = keep.iter();
            scene.objects.retain(|_| *it.next().expect("same length"));
        }
        draw = draw.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    }
}
