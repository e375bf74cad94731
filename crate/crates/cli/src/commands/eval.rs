use std::fmt::Write as _;
use std::path::PathBuf;

use metricpose::io::{load_eval_dirs, save_json};
use metricpose::metrics::{ap_curves, evaluate, EvalConfig, DEFAULT_IOU_RESOLUTION, DEFAULT_SURFACE_SAMPLES};

use super::CliResult;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Prediction root: per-scene `pose_<i>.json` files or records.
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth root written by `synth`.
    #[arg(long)]
    gt: PathBuf,
    /// Report (JSON).
    #[arg(long)]
    out: PathBuf,
    /// AP-versus-threshold curves (CSV).
    #[arg(long)]
    curves: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_IOU_RESOLUTION)]
    iou_resolution: usize,
    #[arg(long, default_value_t = DEFAULT_SURFACE_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    sample_seed: u64,
}

pub fn run(a: Args) -> CliResult<()> {
    let images = load_eval_dirs(&a.pred, &a.gt)?;
    let cfg = EvalConfig {
        iou_resolution: a.iou_resolution,
        surface_samples: a.samples,
        sample_seed: a.sample_seed,
        ..EvalConfig::default()
    };
    let (report, matching) = evaluate(&images, &cfg)?;
    save_json(&a.out, &report)?;
    if let Some(path) = &a.curves {
        let mut csv = String::from("kind,threshold,ap\n");
        for p in ap_curves(&matching)? {
            let _ = writeln!(csv, "{},{},{}", p.kind, p.threshold, p.ap);
        }
        std::fs::write(path, csv)?;
    }
    Ok(())
}
