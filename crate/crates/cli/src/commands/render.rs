use std::path::PathBuf;

use metricpose::io::{load_obj, save_mpf};
use metricpose::raster::rasterize;
use metricpose::{CameraIntrinsics, Error, Frame, Vec3};

use super::{parse, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Metric mesh (OBJ) in camera coordinates.
    #[arg(long)]
    mesh: PathBuf,
    /// `fx,fy,cx,cy,width,height`.
    #[arg(long, value_parser = parse::intrinsics)]
    intrinsics: CameraIntrinsics,
    /// Depth map (MPF).
    #[arg(long)]
    out: PathBuf,
    /// Also write a NOCS map (MPF).
    #[arg(long)]
    nocs: Option<PathBuf>,
    /// Normalized mesh with the same topology supplying NOCS coordinates;
    /// without it the rendered mesh is normalized in place.
    #[arg(long, requires = "nocs")]
    nocs_source: Option<PathBuf>,
}

pub fn run(a: Args) -> CliResult<()> {
    let mesh = load_obj(&a.mesh, Frame::CameraMetric)?;
    let frags = rasterize(&mesh, &a.intrinsics)?;
    if frags.covered_count() == 0 {
        return Err(Error::EmptyRender.into());
    }
    save_mpf(&a.out, &frags.depth_grid())?;
    if let Some(path) = &a.nocs {
        let source = match &a.nocs_source {
            Some(p) => load_obj(p, Frame::Normalized)?,
            None => mesh.normalized()?,
        };
        if source.vertices.len() != mesh.vertices.len() {
            return Err(Error::InvalidInput(format!(
                "NOCS source has {} vertices, mesh has {}",
                source.vertices.len(),
                mesh.vertices.len()
            ))
            .into());
        }
        let attr: Vec<Vec3> = source.vertices.iter().map(|v| v.add_scalar(metricpose::pose::NOCS_OFFSET)).collect();
        save_mpf(path, &frags.attribute_grid(&mesh, &attr))?;
    }
    Ok(())
}
