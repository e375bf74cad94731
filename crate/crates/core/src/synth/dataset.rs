use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{generate_scene, perturb, Observation, ObjectTruth, PerturbationSpec, SceneConfig};
use crate::io::{save_json, save_mpf, save_obj, ObjectRecord, PoseJson, SceneRecord, RECORD_FILE};
use crate::{CameraIntrinsics, Result};

/// Independent seed for item `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

pub fn scene_dir_name(index: usize) -> String {
    format!("scene_{index:04}")
}

/// One generated image: ground truth plus the perturbed observations.
#[derive(Debug, Clone)]
pub struct SyntheticImage {
    pub intrinsics: CameraIntrinsics,
    pub truths: Vec<ObjectTruth>,
    pub observations: Vec<Observation>,
}

/// Scene `index` of the dataset seeded with `seed`.
pub fn synth_image(seed: u64, index: usize, cfg: &SceneConfig, spec: &PerturbationSpec) -> Result<SyntheticImage> {
    let scene_seed = derive_seed(seed, 2 * index as u64);
    let (scene, truths) = generate_scene(scene_seed, cfg)?;
    let noise_seed = derive_seed(seed, 2 * index as u64 + 1);
    let observations = truths
        .iter()
        .enumerate()
        .map(|(i, t)| perturb(&Observation::from(t), spec, derive_seed(noise_seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SyntheticImage { intrinsics: scene.intrinsics, truths, observations })
}

/// Writes `record.json` and the per-object files into `dir`.
pub fn write_image(dir: &Path, image: &SyntheticImage) -> Result<SceneRecord> {
    std::fs::create_dir_all(dir)?;
    let mut objects = Vec::with_capacity(image.truths.len());
    for (i, (t, o)) in image.truths.iter().zip(&image.observations).enumerate() {
        let name = |what: &str, ext: &str| format!("obj{i}_{what}.{ext}");
        let rec = ObjectRecord {
            category: t.category,
            bbox: o.bbox.to_array(),
            z_center: o.z_center,
            radius: o.radius,
            mesh: name("mesh", "obj"),
            nocs: name("nocs", "mpf"),
            depth: name("depth", "mpf"),
            mask: name("mask", "mpf"),
            pose: Some(PoseJson::from(&t.gt_pose)),
            size: Some(t.size.into()),
            box_center: Some(t.box_center.into()),
            score: Some(1.0),
            metric_mesh: Some(name("metric", "obj")),
        };
        save_obj(dir.join(&rec.mesh), &t.view_mesh)?;
        save_mpf(dir.join(&rec.nocs), &o.nocs)?;
        save_mpf(dir.join(&rec.depth), &o.depth)?;
        save_mpf(dir.join(&rec.mask), &o.mask.to_grid())?;
        save_obj(dir.join(rec.metric_mesh.as_ref().expect("set above")), &t.metric_mesh)?;
        objects.push(rec);
    }
    let record = SceneRecord { intrinsics: image.intrinsics, objects };
    save_json(dir.join(RECORD_FILE), &record)?;
    Ok(record)
}
