use std::collections::BTreeMap;
use std::sync::Arc;

use super::{iou3d, SymmetryTable};
use crate::geometry::{OrientedBox3D, SimilarityTransform, TriangleMesh};
use crate::raster::ImageGrid;
use crate::{Category, Error, Result};

/// Minimum 3D IoU for a prediction to be matched to a ground truth at all.
pub const MATCH_IOU_FLOOR: f64 = 0.1;

/// One predicted or ground-truth object instance.
#[derive(Debug, Clone)]
pub struct DetectionRecord {
    pub image_id: String,
    pub category: Category,
    pub score: f64,
    pub box3d: OrientedBox3D,
    pub pose: SimilarityTransform,
    pub mesh: Option<Arc<TriangleMesh>>,
    pub depth: Option<Arc<ImageGrid>>,
}

/// What makes a matched prediction a true positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// IoU at or above the threshold.
    Iou(f64),
    /// Rotation below `max_deg` and translation below `max_cm`; use infinity
    /// to leave one side unconstrained.
    Pose { max_deg: f64, max_cm: f64 },
}

impl Criterion {
    fn accepts(&self, m: &MatchInfo) -> bool {
        match *self {
            Criterion::Iou(t) => m.iou >= t,
            Criterion::Pose { max_deg, max_cm } => m.rot_deg < max_deg && m.trans_cm < max_cm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchInfo {
    pub gt_index: usize,
    pub iou: f64,
    pub rot_deg: f64,
    pub trans_cm: f64,
}

#[derive(Debug, Clone)]
struct Scored {
    category: Category,
    score: f64,
    image_id: String,
    pred_index: usize,
    matched: Option<MatchInfo>,
}

/// Criterion-independent greedy assignment of predictions to ground truth.
#[derive(Debug, Clone)]
pub struct Matching {
    scored: Vec<Scored>,
    gt_per_category: BTreeMap<Category, usize>,
}

impl Matching {
    /// `(prediction index, match)` for every prediction, in input order.
    pub fn pairs(&self) -> Vec<(usize, Option<MatchInfo>)> {
        let mut v: Vec<_> = self.scored.iter().map(|s| (s.pred_index, s.matched)).collect();
        v.sort_by_key(|(i, _)| *i);
        v
    }

    pub fn gt_count(&self) -> usize {
        self.gt_per_category.values().sum()
    }
}

/// Per image and category, predictions in descending score claim the
/// unmatched ground truth with the highest IoU, if that IoU reaches
/// [`MATCH_IOU_FLOOR`].
pub fn match_detections(
    preds: &[DetectionRecord],
    gts: &[DetectionRecord],
    resolution: usize,
    symmetry: &SymmetryTable,
) -> Result<Matching> {
    let mut gt_per_category = BTreeMap::new();
    let mut gt_by_key: BTreeMap<(&str, Category), Vec<usize>> = BTreeMap::new();
    for (i, g) in gts.iter().enumerate() {
        *gt_per_category.entry(g.category).or_insert(0) += 1;
        gt_by_key.entry((g.image_id.as_str(), g.category)).or_default().push(i);
    }
    let mut pred_by_key: BTreeMap<(&str, Category), Vec<usize>> = BTreeMap::new();
    for (i, p) in preds.iter().enumerate() {
        pred_by_key.entry((p.image_id.as_str(), p.category)).or_default().push(i);
    }

    let mut scored = Vec::with_capacity(preds.len());
    for (key, mut idx) in pred_by_key {
        idx.sort_by(|&a, &b| preds[b].score.total_cmp(&preds[a].score).then(a.cmp(&b)));
        let candidates = gt_by_key.get(&key).cloned().unwrap_or_default();
        let mut taken = vec![false; candidates.len()];
        for pi in idx {
            let p = &preds[pi];
            let mut best: Option<(usize, f64)> = None;
            for (ci, &gi) in candidates.iter().enumerate() {
                if taken[ci] {
                    continue;
                }
                let iou = iou3d(&p.box3d, &gts[gi].box3d, resolution);
                if iou >= MATCH_IOU_FLOOR && best.is_none_or(|(_, b)| iou > b) {
                    best = Some((ci, iou));
                }
            }
            let matched = match best {
                Some((ci, iou)) => {
                    taken[ci] = true;
                    let gi = candidates[ci];
                    let (rot_deg, trans_cm) = symmetry.pose_errors(&p.pose, &gts[gi].pose, p.category)?;
                    Some(MatchInfo { gt_index: gi, iou, rot_deg, trans_cm })
                }
                None => None,
            };
            scored.push(Scored { category: p.category, score: p.score, image_id: p.image_id.clone(), pred_index: pi, matched });
        }
    }
    Ok(Matching { scored, gt_per_category })
}

/// All-point interpolated AP of one ranked list of TP flags.
fn average_precision(tp: &[bool], n_gt: usize) -> f64 {
    if n_gt == 0 {
        return 0.0;
    }
    let mut precision = Vec::with_capacity(tp.len());
    let mut recall = Vec::with_capacity(tp.len());
    let mut hits = 0usize;
    for (k, &t) in tp.iter().enumerate() {
        hits += t as usize;
        precision.push(hits as f64 / (k + 1) as f64);
        recall.push(hits as f64 / n_gt as f64);
    }
    for k in (0..precision.len().saturating_sub(1)).rev() {
        precision[k] = precision[k].max(precision[k + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for k in 0..tp.len() {
        if recall[k] > prev_recall {
            ap += (recall[k] - prev_recall) * precision[k];
            prev_recall = recall[k];
        }
    }
    ap
}

/// Mean over ground-truth categories of the per-category AP, in percent.
pub fn ap_from_matching(m: &Matching, criterion: Criterion) -> Result<f64> {
    if m.gt_count() == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    let mut total = 0.0;
    for (&cat, &n_gt) in &m.gt_per_category {
        let mut ranked: Vec<&Scored> = m.scored.iter().filter(|s| s.category == cat).collect();
        ranked.sort_by(|a, b| {
            b.score.total_cmp(&a.score).then_with(|| a.image_id.cmp(&b.image_id)).then(a.pred_index.cmp(&b.pred_index))
        });
        let tp: Vec<bool> = ranked.iter().map(|s| s.matched.is_some_and(|mi| criterion.accepts(&mi))).collect();
        total += average_precision(&tp, n_gt);
    }
    Ok(100.0 * total / m.gt_per_category.len() as f64)
}

pub fn detection_ap(
    preds: &[DetectionRecord],
    gts: &[DetectionRecord],
    criterion: Criterion,
    resolution: usize,
    symmetry: &SymmetryTable,
) -> Result<f64> {
    ap_from_matching(&match_detections(preds, gts, resolution, symmetry)?, criterion)
}
