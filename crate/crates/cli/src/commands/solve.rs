use std::path::{Path, PathBuf};

use metricpose::io::{save_json, save_mpf, save_obj, solve_record, DepthHint, SceneRecord, POSE_FILE_PREFIX};
use metricpose::RansacConfig;
use rayon::prelude::*;

use super::{parse, warn, CliError, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    record: PathBuf,
    /// Object to solve; without it every object is solved and `--out` is a
    /// directory receiving `pose_<i>.json`.
    #[arg(long)]
    index: Option<usize>,
    /// One observed depth pixel `u,v,d`, or `auto` to take it from the
    /// record's depth map near the box center.
    #[arg(long, value_parser = parse::depth_hint)]
    od: Option<DepthHint>,
    #[arg(long, default_value_t = RansacConfig::default().iterations)]
    ransac_iters: usize,
    #[arg(long, default_value_t = RansacConfig::default().inlier_threshold)]
    inlier_thresh: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the metric mesh and rendered depth next to each pose file.
    #[arg(long)]
    save_shape: bool,
}

fn solve_one(a: &Args, record: &SceneRecord, dir: &Path, index: usize, out: &Path) -> metricpose::Result<()> {
    let config = RansacConfig { iterations: a.ransac_iters, inlier_threshold: a.inlier_thresh, seed: a.seed, ..Default::default() };
    let (mut pose, est) = solve_record(dir, record, index, &config, a.od.unwrap_or(DepthHint::None))?;
    if a.save_shape {
        let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("pose").to_string();
        let parent = out.parent().unwrap_or(Path::new(""));
        let (mesh, depth) = (format!("{stem}_mesh.obj"), format!("{stem}_depth.mpf"));
        save_obj(parent.join(&mesh), &est.mesh)?;
        save_mpf(parent.join(&depth), &est.depth)?;
        pose.mesh = Some(mesh);
        pose.depth = Some(depth);
    }
    save_json(out, &pose)
}

pub fn run(a: Args) -> CliResult<()> {
    if a.ransac_iters == 0 || a.inlier_thresh.is_nan() || a.inlier_thresh <= 0.0 {
        return Err(CliError::Usage("--ransac-iters and --inlier-thresh must be positive".into()));
    }
    let (record, dir) = SceneRecord::load(&a.record)?;
    match a.index {
        Some(i) => Ok(solve_one(&a, &record, &dir, i, &a.out)?),
        None => {
            std::fs::create_dir_all(&a.out)?;
            let results: Vec<_> = (0..record.objects.len())
                .into_par_iter()
                .map(|i| solve_one(&a, &record, &dir, i, &a.out.join(format!("{POSE_FILE_PREFIX}{i}.json"))))
                .collect();
            for (i, r) in results.iter().enumerate() {
                match r {
                    Ok(()) => {}
                    Err(e @ (metricpose::Error::Io(_) | metricpose::Error::Json(_))) => {
                        return Err(CliError::Data(metricpose::Error::Format(format!("object {i}: {e}"))))
                    }
                    Err(e) => warn(&format!("{} object {i}", a.record.display()), e),
                }
            }
            Ok(())
        }
    }
}
