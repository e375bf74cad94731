//! Core geometric types: meshes, the pinhole camera, similarity transforms,
//! 2D/3D boxes, plus the Umeyama similarity solver.

mod boxes;
mod camera;
mod mesh;
mod sphere;
mod transform;

pub use boxes::{BoundingBox2D, OrientedBox3D};
pub use camera::CameraIntrinsics;
pub use mesh::{Frame, TriangleMesh};
pub use sphere::{minimal_enclosing_sphere, Sphere};
pub use transform::{
    apply_similarity, check_rotation, rotation_geodesic_deg, umeyama, SimilarityTransform,
};

/// 3-vector in meters (camera frame) or dimensionless units (object frame).
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 matrix, used for rotations and covariances.
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Tolerance on `RᵀR − I` and `det R − 1` for a matrix to count as a proper rotation.
pub const ROTATION_TOLERANCE: f64 = 1e-6;
