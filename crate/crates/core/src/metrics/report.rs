use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    ap_from_matching, chamfer_distance, match_detections, normal_consistency, sample_surface, Criterion,
    DepthAccumulator, DepthMetrics, DetectionRecord, Matching, SymmetryTable, DEFAULT_IOU_RESOLUTION,
    DEFAULT_SURFACE_SAMPLES,
};
use crate::Result;

/// IoU thresholds reported as `iou_ap` keys (percent).
pub const IOU_THRESHOLDS: [u32; 3] = [25, 50, 75];

/// `(degrees, centimeters)` pose criteria; infinity leaves a side open.
pub const POSE_THRESHOLDS: [(f64, f64); 10] = [
    (5.0, 2.0),
    (5.0, 5.0),
    (10.0, 2.0),
    (10.0, 5.0),
    (10.0, 10.0),
    (5.0, f64::INFINITY),
    (10.0, f64::INFINITY),
    (f64::INFINITY, 2.0),
    (f64::INFINITY, 5.0),
    (f64::INFINITY, 10.0),
];

pub fn pose_key(deg: f64, cm: f64) -> String {
    match (deg.is_finite(), cm.is_finite()) {
        (true, true) => format!("{deg}deg_{cm}cm"),
        (true, false) => format!("{deg}deg"),
        (false, true) => format!("{cm}cm"),
        (false, false) => "any".into(),
    }
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub iou_resolution: usize,
    pub surface_samples: usize,
    pub sample_seed: u64,
    pub symmetry: SymmetryTable,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_resolution: DEFAULT_IOU_RESOLUTION,
            surface_samples: DEFAULT_SURFACE_SAMPLES,
            sample_seed: 0,
            symmetry: SymmetryTable::default(),
        }
    }
}

/// Predictions and ground truth of one image.
#[derive(Debug, Clone, Default)]
pub struct EvalImage {
    pub id: String,
    pub preds: Vec<DetectionRecord>,
    pub gts: Vec<DetectionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// AP (percent) keyed by IoU threshold in percent.
    pub iou_ap: BTreeMap<String, f64>,
    /// AP (percent) keyed by pose criterion, e.g. `5deg_5cm`, `10deg`, `10cm`.
    pub pose_ap: BTreeMap<String, f64>,
    /// Mean chamfer distance over matched pairs with meshes, in units of 1e-3.
    pub chamfer_mean: Option<f64>,
    /// Mean normal consistency (higher is better).
    pub normal_consistency: Option<f64>,
    pub depth: Option<DepthMetrics>,
    pub num_gt: usize,
    pub num_pred: usize,
    pub num_matched: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub kind: &'static str,
    pub threshold: f64,
    pub ap: f64,
}

/// AP as a function of IoU, rotation and translation thresholds.
pub fn ap_curves(m: &Matching) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    for k in 0..=100 {
        let t = k as f64 / 100.0;
        out.push(CurvePoint { kind: "iou", threshold: t, ap: ap_from_matching(m, Criterion::Iou(t))? });
    }
    for k in 0..=60 {
        let t = k as f64;
        let c = Criterion::Pose { max_deg: t, max_cm: f64::INFINITY };
        out.push(CurvePoint { kind: "rotation_deg", threshold: t, ap: ap_from_matching(m, c)? });
    }
    for k in 0..=30 {
        let t = k as f64 * 0.5;
        let c = Criterion::Pose { max_deg: f64::INFINITY, max_cm: t };
        out.push(CurvePoint { kind: "translation_cm", threshold: t, ap: ap_from_matching(m, c)? });
    }
    Ok(out)
}

fn flatten(images: &[EvalImage]) -> (Vec<DetectionRecord>, Vec<DetectionRecord>) {
    let mut preds = Vec::new();
    let mut gts = Vec::new();
    for img in images {
        for p in &img.preds {
            preds.push(DetectionRecord { image_id: img.id.clone(), ..p.clone() });
        }
        for g in &img.gts {
            gts.push(DetectionRecord { image_id: img.id.clone(), ..g.clone() });
        }
    }
    (preds, gts)
}

/// Full metric report plus the matching it was computed from.
pub fn evaluate(images: &[EvalImage], cfg: &EvalConfig) -> Result<(MetricReport, Matching)> {
    let (preds, gts) = flatten(images);
    let matching = match_detections(&preds, &gts, cfg.iou_resolution, &cfg.symmetry)?;

    let mut iou_ap = BTreeMap::new();
    for t in IOU_THRESHOLDS {
        iou_ap.insert(t.to_string(), ap_from_matching(&matching, Criterion::Iou(t as f64 / 100.0))?);
    }
    let mut pose_ap = BTreeMap::new();
    for (deg, cm) in POSE_THRESHOLDS {
        pose_ap.insert(pose_key(deg, cm), ap_from_matching(&matching, Criterion::Pose { max_deg: deg, max_cm: cm })?);
    }

    let pairs: Vec<(usize, usize)> =
        matching.pairs().into_iter().filter_map(|(p, m)| m.map(|m| (p, m.gt_index))).collect();

    let shape: Vec<(f64, f64)> = pairs
        .par_iter()
        .enumerate()
        .filter_map(|(k, &(p, g))| {
            let (pm, gm) = (preds[p].mesh.as_ref()?, gts[g].mesh.as_ref()?);
            let seed = cfg.sample_seed.wrapping_add(2 * k as u64);
            let a = sample_surface(pm, cfg.surface_samples, seed).ok()?;
            let b = sample_surface(gm, cfg.surface_samples, seed + 1).ok()?;
            Some((chamfer_distance(&a.points, &b.points).ok()?, normal_consistency(&a, &b).ok()?))
        })
        .collect();
    let (chamfer_mean, normal_mean) = if shape.is_empty() {
        (None, None)
    } else {
        let n = shape.len() as f64;
        (
            Some(1e3 * shape.iter().map(|s| s.0).sum::<f64>() / n),
            Some(shape.iter().map(|s| s.1).sum::<f64>() / n),
        )
    };

    let mut acc = DepthAccumulator::default();
    let mut any_depth = false;
    for &(p, g) in &pairs {
        if let (Some(pd), Some(gd)) = (&preds[p].depth, &gts[g].depth) {
            acc.add(pd, gd)?;
            any_depth = true;
        }
    }
    let depth = if any_depth { acc.finish().ok() } else { None };

    let report = MetricReport {
        iou_ap,
        pose_ap,
        chamfer_mean,
        normal_consistency: normal_mean,
        depth,
        num_gt: gts.len(),
        num_pred: preds.len(),
        num_matched: pairs.len(),
    };
    Ok((report, matching))
}
