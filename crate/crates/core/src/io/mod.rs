//! File formats: Wavefront OBJ meshes, MPF float maps and JSON records.

mod dataset;
mod mpf;
mod obj;
mod record;

pub use mpf::{decode_mpf, encode_mpf, load_mpf, save_mpf, MPF_MAGIC};
pub use obj::{load_obj, parse_obj, save_obj, write_obj};
pub use record::{
    load_json, save_json, to_json_string, ObjectRecord, PoseJson, PoseRecord, SceneRecord, RECORD_FILE,
};
pub use dataset::{
    load_eval_dirs, load_prediction_dir, load_record_detections, nearest_observation, scene_dirs, solve_record,
    DepthHint, POSE_FILE_PREFIX,
};
