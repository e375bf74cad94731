use std::path::PathBuf;

use metricpose::io::{load_obj, save_obj, SceneRecord};
use metricpose::lift::lift_to_metric;
use metricpose::{Frame, LiftInputs};

use super::CliResult;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    record: PathBuf,
    #[arg(long)]
    index: usize,
    /// Metric mesh (OBJ) in camera coordinates.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(a: Args) -> CliResult<()> {
    let (record, dir) = SceneRecord::load(&a.record)?;
    let obj = record.object(a.index)?;
    let lift = LiftInputs {
        mesh: load_obj(dir.join(&obj.mesh), Frame::Normalized)?,
        bbox: obj.bbox()?,
        z_center: obj.z_center,
        radius: obj.radius,
        intrinsics: record.intrinsics,
    };
    save_obj(&a.out, &lift_to_metric(&lift)?)?;
    Ok(())
}
