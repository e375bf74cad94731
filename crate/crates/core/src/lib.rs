//! Geometric pipeline for category-level metric-scale object shape and pose
//! estimation from a single view.
//!
//! Predicted quantities (a normalized object mesh, a NOCS map, the object
//! center depth `Z` and radius `R`) flow through:
//!
//! 1. [`noce`]: bbox/focal compensation of the center depth and radius.
//! 2. [`lift`]: lifting the normalized mesh to a metric mesh in camera space.
//! 3. [`raster`]: z-buffer rendering of depth and per-vertex attribute maps.
//! 4. [`pose`]: NOCS ↔ depth correspondences, RANSAC + Umeyama similarity
//!    fit, and one-pixel sparse-depth refinement.
//! 5. [`metrics`]: 3D IoU / pose AP, chamfer and normal consistency, depth errors.
//!
//! [`synth`] generates ground-truth scenes that exercise the whole chain, and
//! [`io`] holds the OBJ, float-map and JSON record formats.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod category;
pub mod error;
pub mod geometry;
pub mod io;
pub mod lift;
pub mod metrics;
pub mod noce;
pub mod pose;
pub mod raster;
pub mod synth;

pub use category::Category;
pub use error::{Error, Result};
pub use geometry::{
    apply_similarity, rotation_geodesic_deg, umeyama, BoundingBox2D, CameraIntrinsics, Frame,
    Mat3, OrientedBox3D, SimilarityTransform, TriangleMesh, Vec3,
};
pub use lift::{backproject_pixel, lift_to_metric, LiftInputs};
pub use noce::{noce_denormalize, noce_normalize, radius_denormalize, radius_normalize, NoceScalars};
pub use pose::{
    build_correspondences, estimate_object, refine_with_sparse_depth, solve_pose, ObjectEstimate,
    PoseEstimate, RansacConfig, SparseDepthObservation,
};
pub use raster::{backproject_grid, render_attributes, render_depth, ImageGrid, Mask};

pub use nalgebra;
