//! Scene directories: solving objects of a record and loading prediction and
//! ground-truth directories for evaluation.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use super::{load_json, load_mpf, load_obj, ObjectRecord, PoseJson, PoseRecord, SceneRecord, RECORD_FILE};
use crate::geometry::{BoundingBox2D, Frame, OrientedBox3D, SimilarityTransform, Vec3};
use crate::lift::LiftInputs;
use crate::metrics::{DetectionRecord, EvalImage};
use crate::pose::{estimate_object, ObjectEstimate, RansacConfig, SparseDepthObservation};
use crate::raster::{ImageGrid, Mask};
use crate::{Category, Error, Result};

/// Prefix of per-object prediction files written by `solve`.
pub const POSE_FILE_PREFIX: &str = "pose_";

/// Where the one-pixel depth observation comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DepthHint {
    None,
    /// Explicit pixel and depth.
    Pixel(SparseDepthObservation),
    /// The record's depth map at the masked pixel closest to the bbox center.
    Nearest,
}

/// Masked pixel with valid depth closest to the bbox center; ties go to the
/// first pixel in row-major order.
pub fn nearest_observation(mask: &Mask, depth: &ImageGrid, bbox: &BoundingBox2D) -> Option<SparseDepthObservation> {
    let (cu, cv) = bbox.center();
    let mut best: Option<(f64, SparseDepthObservation)> = None;
    for (u, v) in mask.pixels() {
        let Some(d) = depth.value(u, v) else { continue };
        let dist = (u as f64 + 0.5 - cu).powi(2) + (v as f64 + 0.5 - cv).powi(2);
        if best.as_ref().is_none_or(|(b, _)| dist < *b) {
            best = Some((dist, SparseDepthObservation { pixel: (u, v), depth: d }));
        }
    }
    best.map(|(_, o)| o)
}

/// Runs the full per-object pipeline on object `index` of a record.
pub fn solve_record(
    dir: &Path,
    record: &SceneRecord,
    index: usize,
    config: &RansacConfig,
    hint: DepthHint,
) -> Result<(PoseRecord, ObjectEstimate)> {
    let obj = record.object(index)?;
    let mesh = load_obj(dir.join(&obj.mesh), Frame::Normalized)?;
    let nocs = load_mpf(dir.join(&obj.nocs))?;
    let mask = Mask::from_grid(&load_mpf(dir.join(&obj.mask))?);
    let bbox = obj.bbox()?;
    let observations: Vec<SparseDepthObservation> = match hint {
        DepthHint::None => Vec::new(),
        DepthHint::Pixel(o) => vec![o],
        DepthHint::Nearest => {
            let depth = load_mpf(dir.join(&obj.depth))?;
            vec![nearest_observation(&mask, &depth, &bbox).ok_or(Error::NoValidPixels)?]
        }
    };
    let lift = LiftInputs { mesh, bbox, z_center: obj.z_center, radius: obj.radius, intrinsics: record.intrinsics };
    let est = estimate_object(&lift, &nocs, &mask, config, &observations)?;
    let rec = PoseRecord::new(obj.category, obj.score.unwrap_or(1.0), &est.pose, est.z_center, est.radius);
    Ok((rec, est))
}

fn oriented_box(pose: &SimilarityTransform, size: [f64; 3], box_center: Option<[f64; 3]>) -> Result<OrientedBox3D> {
    let c = box_center.map(Vec3::from).unwrap_or_else(Vec3::zeros);
    let half = (Vec3::from(size) / 2.0).map(|h| h.max(1e-12));
    OrientedBox3D::new(pose.apply(&c), pose.rotation, half)
}

#[allow(clippy::too_many_arguments)]
fn detection(
    dir: &Path,
    image_id: &str,
    category: Category,
    score: f64,
    pose: &PoseJson,
    size: Option<[f64; 3]>,
    box_center: Option<[f64; 3]>,
    mesh: Option<&String>,
    depth: Option<&String>,
) -> Result<DetectionRecord> {
    let pose = pose.to_transform()?;
    let size = size.ok_or_else(|| Error::InvalidInput(format!("{}: object without size", dir.display())))?;
    Ok(DetectionRecord {
        image_id: image_id.to_string(),
        category,
        score,
        box3d: oriented_box(&pose, size, box_center)?,
        pose,
        mesh: mesh.map(|m| load_obj(dir.join(m), Frame::CameraMetric).map(Arc::new)).transpose()?,
        depth: depth.map(|d| load_mpf(dir.join(d)).map(Arc::new)).transpose()?,
    })
}

fn from_object(dir: &Path, image_id: &str, o: &ObjectRecord) -> Result<Option<DetectionRecord>> {
    let Some(pose) = &o.pose else { return Ok(None) };
    detection(
        dir,
        image_id,
        o.category,
        o.score.unwrap_or(1.0),
        pose,
        o.size,
        o.box_center,
        o.metric_mesh.as_ref(),
        Some(&o.depth),
    )
    .map(Some)
}

/// Objects of `dir/record.json` that carry a pose.
pub fn load_record_detections(dir: &Path, image_id: &str) -> Result<Vec<DetectionRecord>> {
    let (record, dir) = SceneRecord::load(dir.join(RECORD_FILE))?;
    let mut out = Vec::new();
    for o in &record.objects {
        out.extend(from_object(&dir, image_id, o)?);
    }
    Ok(out)
}

fn pose_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<(u64, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        let index = name
            .strip_prefix(POSE_FILE_PREFIX)
            .and_then(|r| r.strip_suffix(".json"))
            .and_then(|r| r.parse::<u64>().ok());
        if let Some(i) = index {
            files.push((i, path));
        }
    }
    files.sort();
    Ok(files.into_iter().map(|(_, p)| p).collect())
}

/// Predictions of one image: `pose_<i>.json` files if present, otherwise the
/// posed objects of `record.json`.
pub fn load_prediction_dir(dir: &Path, image_id: &str) -> Result<Vec<DetectionRecord>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let files = pose_files(dir)?;
    if files.is_empty() {
        if dir.join(RECORD_FILE).is_file() {
            return load_record_detections(dir, image_id);
        }
        return Ok(Vec::new());
    }
    files
        .iter()
        .map(|f| {
            let p: PoseRecord = load_json(f)?;
            detection(
                dir,
                image_id,
                p.category,
                p.score,
                &p.pose,
                Some(p.size),
                Some(p.box_center),
                p.mesh.as_ref(),
                p.depth.as_ref(),
            )
        })
        .collect()
}

/// Sorted names of the subdirectories of `root` that hold a record.
pub fn scene_dirs(root: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(root)? {
        let entry = entry?;
        if entry.path().join(RECORD_FILE).is_file() {
            if let Some(name) = entry.file_name().to_str() {
                names.push(name.to_string());
            }
        }
    }
    names.sort();
    Ok(names)
}

/// Pairs every ground-truth scene of `gt_root` with the same-named directory
/// under `pred_root`.
pub fn load_eval_dirs(pred_root: &Path, gt_root: &Path) -> Result<Vec<EvalImage>> {
    let names = scene_dirs(gt_root)?;
    if names.is_empty() {
        return Err(Error::InvalidInput(format!("no scene records under {}", gt_root.display())));
    }
    names
        .par_iter()
        .map(|name| {
            Ok(EvalImage {
                id: name.clone(),
                gts: load_record_detections(&gt_root.join(name), name)?,
                preds: load_prediction_dir(&pred_root.join(name), name)?,
            })
        })
        .collect()
}
