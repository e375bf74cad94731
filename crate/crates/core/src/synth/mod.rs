//! Synthetic ground truth: parametric category meshes, seeded scene sampling,
//! occlusion-aware rendering of depth/NOCS/masks, and controlled perturbation
//! of the predicted quantities.

mod dataset;
mod perturb;
mod scene;
mod shapes;

pub use dataset::{derive_seed, scene_dir_name, synth_image, write_image, SyntheticImage};
pub use perturb::{perturb, Observation, PerturbationSpec};
pub use scene::{
    generate_scene, radius_range, render_ground_truth, sample_scene, sphere_in_view, ObjectTruth, SceneConfig,
    SceneObject, SceneSpec,
};
pub use shapes::{make_category_mesh, make_category_mesh_named, ShapeParams};
