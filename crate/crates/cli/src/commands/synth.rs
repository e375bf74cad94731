use std::path::PathBuf;

use metricpose::synth::{scene_dir_name, synth_image, write_image, PerturbationSpec, SceneConfig};
use rayon::prelude::*;

use super::{parse, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    scenes: usize,
    /// Output directory; receives one `scene_NNNN/` per scene.
    #[arg(long)]
    out: PathBuf,
    /// Predictor error, e.g. `z=0.2,r=0.1,nocs=0.01,outliers=0.3,erode=1`.
    #[arg(long, value_parser = parse::perturbation)]
    perturb: Option<PerturbationSpec>,
    #[arg(long, default_value_t = 4)]
    subdivisions: usize,
    #[arg(long, default_value_t = 1)]
    min_objects: usize,
    #[arg(long, default_value_t = 3)]
    max_objects: usize,
}

pub fn run(a: Args) -> CliResult<()> {
    if a.min_objects == 0 || a.max_objects < a.min_objects {
        return Err(super::CliError::Usage("need 1 <= --min-objects <= --max-objects".into()));
    }
    let cfg = SceneConfig {
        subdivisions: a.subdivisions,
        min_objects: a.min_objects,
        max_objects: a.max_objects,
        ..SceneConfig::default()
    };
    let spec = a.perturb.unwrap_or_default();
    std::fs::create_dir_all(&a.out)?;
    (0..a.scenes).into_par_iter().try_for_each(|i| -> CliResult<()> {
        let image = synth_image(a.seed, i, &cfg, &spec)?;
        write_image(&a.out.join(scene_dir_name(i)), &image)?;
        Ok(())
    })
}
