//! Design-choice comparisons on synthetic scenes.

use std::path::PathBuf;
use std::sync::Arc;

use clap::ValueEnum;
use metricpose::io::save_json;
use metricpose::metrics::{evaluate, DetectionRecord, EvalConfig, EvalImage, MetricReport};
use metricpose::noce::DEFAULT_PATCH_SIZE;
use metricpose::pose::solve_pose;
use metricpose::synth::{derive_seed, synth_image, ObjectTruth, Observation, PerturbationSpec, SceneConfig, SyntheticImage};
use metricpose::{
    build_correspondences, estimate_object, noce_denormalize, noce_normalize, CameraIntrinsics, Error, ImageGrid,
    LiftInputs, RansacConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use super::{parse, warn, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Center depth through patch normalization versus an uncompensated baseline.
    Noce,
    /// Pose from a simulated per-pixel depth regressor.
    RegressDepth,
    /// Pose from the depth rendered off the lifted metric mesh.
    RenderedDepth,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    scenes: usize,
    /// Report (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Predictor error for the depth modes.
    #[arg(long, value_parser = parse::perturbation, default_value = "z=0.1,r=0.1,nocs=0.01")]
    perturb: PerturbationSpec,
    /// Relative per-pixel noise of the simulated depth regressor.
    #[arg(long, default_value_t = 0.02)]
    regress_noise: f64,
    #[arg(long, default_value_t = DEFAULT_PATCH_SIZE)]
    patch_size: f64,
}

#[derive(Serialize)]
struct CenterErrors {
    max_rel_depth_error: f64,
    median_translation_error_m: f64,
    mean_translation_error_m: f64,
}

#[derive(Serialize)]
struct NoceReport {
    mode: &'static str,
    scenes: usize,
    objects: usize,
    min_box_side_px: f64,
    max_box_side_px: f64,
    noce: CenterErrors,
    baseline: CenterErrors,
    /// Single focal-over-ratio constant the baseline applies to every box.
    baseline_factor: f64,
}

#[derive(Serialize)]
struct DepthReport<'a> {
    mode: &'a str,
    scenes: usize,
    objects: usize,
    failed: usize,
    perturbation: PerturbationSpec,
    report: MetricReport,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn center_errors(truths: &[(ObjectTruth, CameraIntrinsics)], depths: &[f64]) -> CenterErrors {
    let mut rel = 0.0f64;
    let mut trans = Vec::with_capacity(depths.len());
    for ((t, k), z) in truths.iter().zip(depths) {
        rel = rel.max((z - t.z_center).abs() / t.z_center);
        let (u, v) = t.bbox.center();
        trans.push((k.backproject(u, v, *z) - t.gt_pose.translation).norm());
    }
    let mean = trans.iter().sum::<f64>() / trans.len().max(1) as f64;
    CenterErrors { max_rel_depth_error: rel, median_translation_error_m: median(trans), mean_translation_error_m: mean }
}

fn images(a: &Args, spec: &PerturbationSpec) -> CliResult<Vec<SyntheticImage>> {
    let cfg = SceneConfig::default();
    Ok((0..a.scenes).into_par_iter().map(|i| synth_image(a.seed, i, &cfg, spec)).collect::<metricpose::Result<_>>()?)
}

fn run_noce(a: &Args) -> CliResult<()> {
    let imgs = images(a, &PerturbationSpec::default())?;
    let truths: Vec<(ObjectTruth, CameraIntrinsics)> =
        imgs.into_iter().flat_map(|im| im.truths.into_iter().map(move |t| (t, im.intrinsics))).collect();
    if truths.is_empty() {
        return Err(Error::InvalidInput("no objects generated".into()).into());
    }
    let normalized: Vec<f64> = truths
        .iter()
        .map(|(t, k)| noce_normalize(t.z_center, &t.bbox, a.patch_size, k))
        .collect::<metricpose::Result<_>>()?;
    let restored: Vec<f64> = truths
        .iter()
        .zip(&normalized)
        .map(|((t, k), z)| noce_denormalize(*z, &t.bbox, a.patch_size, k))
        .collect::<metricpose::Result<_>>()?;
    // The strongest box-agnostic reading of a normalized value is one global factor.
    let factor = median(truths.iter().zip(&normalized).map(|((t, _), z)| t.z_center / z).collect());
    let baseline: Vec<f64> = normalized.iter().map(|z| z * factor).collect();
    let sides: Vec<f64> = truths.iter().map(|(t, _)| t.bbox.longer_side()).collect();
    let report = NoceReport {
        mode: "noce",
        scenes: a.scenes,
        objects: truths.len(),
        min_box_side_px: sides.iter().copied().fold(f64::INFINITY, f64::min),
        max_box_side_px: sides.iter().copied().fold(0.0, f64::max),
        noce: center_errors(&truths, &restored),
        baseline: center_errors(&truths, &baseline),
        baseline_factor: factor,
    };
    save_json(&a.out, &report)?;
    Ok(())
}

fn truth_record(id: &str, t: &ObjectTruth) -> metricpose::Result<DetectionRecord> {
    Ok(DetectionRecord {
        image_id: id.to_string(),
        category: t.category,
        score: 1.0,
        box3d: t.box3d()?,
        pose: t.gt_pose,
        mesh: Some(Arc::new(t.metric_mesh.clone())),
        depth: Some(Arc::new(t.depth.clone())),
    })
}

/// Per-pixel depth with the object's center-depth error and independent
/// multiplicative noise, as a regressor without surface structure would give.
fn regressed_depth(t: &ObjectTruth, o: &Observation, sigma: f64, seed: u64) -> metricpose::Result<ImageGrid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let global = o.z_center / t.z_center;
    let mut out = ImageGrid::new_invalid(t.depth.width(), t.depth.height(), 1);
    for (u, v) in o.mask.pixels() {
        if let Some(d) = t.depth.value(u, v) {
            let noisy = d * global * (1.0 + normal.sample(&mut rng));
            if noisy > 0.0 {
                out.set(u, v, &[noisy as f32]);
            }
        }
    }
    Ok(out)
}

fn predict(a: &Args, im: &SyntheticImage, i: usize, seed: u64) -> metricpose::Result<DetectionRecord> {
    let (t, o) = (&im.truths[i], &im.observations[i]);
    let config = RansacConfig::default();
    let (pose, mesh, depth) = match a.mode {
        Mode::RenderedDepth => {
            let lift = LiftInputs {
                mesh: t.view_mesh.clone(),
                bbox: o.bbox,
                z_center: o.z_center,
                radius: o.radius,
                intrinsics: im.intrinsics,
            };
            let est = estimate_object(&lift, &o.nocs, &o.mask, &config, &[])?;
            (est.pose, Some(Arc::new(est.mesh)), est.depth)
        }
        Mode::RegressDepth => {
            let depth = regressed_depth(t, o, a.regress_noise, seed)?;
            let corrs = build_correspondences(&o.nocs, &depth, &o.mask, &im.intrinsics)?;
            (solve_pose(&corrs, &config)?, None, depth)
        }
        Mode::Noce => unreachable!("handled separately"),
    };
    Ok(DetectionRecord {
        image_id: String::new(),
        category: t.category,
        score: 1.0,
        box3d: pose.box3d()?,
        pose: pose.transform,
        mesh,
        depth: Some(Arc::new(depth)),
    })
}

fn run_depth(a: &Args) -> CliResult<()> {
    let imgs = images(a, &a.perturb)?;
    let per_image: Vec<(EvalImage, usize)> = imgs
        .par_iter()
        .enumerate()
        .map(|(n, im)| {
            let id = format!("scene_{n:04}");
            let gts = im.truths.iter().map(|t| truth_record(&id, t)).collect::<metricpose::Result<Vec<_>>>()?;
            let mut preds = Vec::new();
            let mut failed = 0;
            for i in 0..im.truths.len() {
                match predict(a, im, i, derive_seed(a.seed ^ 0x5eed, (n * 64 + i) as u64)) {
                    Ok(p) => preds.push(DetectionRecord { image_id: id.clone(), ..p }),
                    Err(e) => {
                        warn(&format!("{id} object {i}"), &e);
                        failed += 1;
                    }
                }
            }
            Ok((EvalImage { id, preds, gts }, failed))
        })
        .collect::<metricpose::Result<_>>()?;
    let failed = per_image.iter().map(|p| p.1).sum();
    let objects = per_image.iter().map(|p| p.0.gts.len()).sum();
    let images: Vec<EvalImage> = per_image.into_iter().map(|p| p.0).collect();
    let (report, _) = evaluate(&images, &EvalConfig::default())?;
    let mode = if a.mode == Mode::RegressDepth { "regress-depth" } else { "rendered-depth" };
    save_json(&a.out, &DepthReport { mode, scenes: a.scenes, objects, failed, perturbation: a.perturb, report })?;
    Ok(())
}

pub fn run(a: Args) -> CliResult<()> {
    if a.scenes == 0 {
        return Err(super::CliError::Usage("--scenes must be at least 1".into()));
    }
    match a.mode {
        Mode::Noce => run_noce(&a),
        Mode::RegressDepth | Mode::RenderedDepth => run_depth(&a),
    }
}
