use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::geometry::{check_rotation, BoundingBox2D, CameraIntrinsics, Mat3, SimilarityTransform, Vec3};
use crate::pose::PoseEstimate;
use crate::{Category, Error, Result};

/// File name of the per-image record inside a scene directory.
pub const RECORD_FILE: &str = "record.json";

/// Similarity transform with a row-major rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseJson {
    pub scale: f64,
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
}

impl From<&SimilarityTransform> for PoseJson {
    fn from(t: &SimilarityTransform) -> Self {
        Self {
            scale: t.scale,
            rotation: t.rotation_row_major(),
            translation: [t.translation.x, t.translation.y, t.translation.z],
        }
    }
}

impl PoseJson {
    /// Checks that the rotation is proper to within 1e-6 and the scale positive.
    pub fn to_transform(&self) -> Result<SimilarityTransform> {
        let r = Mat3::from_row_slice(&self.rotation);
        check_rotation(&r)?;
        SimilarityTransform::new(self.scale, r, Vec3::from(self.translation))
    }
}

/// One object of a scene record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub category: Category,
    /// `[x, y, w, h]` in pixels.
    pub bbox: [f64; 4],
    pub z_center: f64,
    pub radius: f64,
    /// Normalized mesh (OBJ), relative to the record directory.
    pub mesh: String,
    /// 3-channel NOCS map (MPF).
    pub nocs: String,
    /// 1-channel observed depth map (MPF).
    pub depth: String,
    /// 1-channel instance mask (MPF, 1 inside, NaN outside).
    pub mask: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<PoseJson>,
    /// Full extents of the object box in meters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<[f64; 3]>,
    /// Box center in the object frame (before scaling).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_center: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    /// Metric mesh in camera coordinates (OBJ), used for shape metrics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_mesh: Option<String>,
}

impl ObjectRecord {
    pub fn bbox(&self) -> Result<BoundingBox2D> {
        let [x, y, w, h] = self.bbox;
        BoundingBox2D::new(x, y, w, h)
    }

    pub fn file_refs(&self) -> impl Iterator<Item = &str> {
        [&self.mesh, &self.nocs, &self.depth, &self.mask]
            .into_iter()
            .chain(self.metric_mesh.as_ref())
            .map(String::as_str)
    }
}

/// Per-image JSON record: intrinsics plus objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub intrinsics: CameraIntrinsics,
    pub objects: Vec<ObjectRecord>,
}

impl SceneRecord {
    /// Loads and validates a record, including that every referenced file exists.
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, PathBuf)> {
        let path = path.as_ref();
        let record: SceneRecord = load_json(path)?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        record.validate(&dir)?;
        Ok((record, dir))
    }

    pub fn validate(&self, dir: &Path) -> Result<()> {
        self.intrinsics.validate()?;
        for (i, o) in self.objects.iter().enumerate() {
            o.bbox()?;
            if let Some(p) = &o.pose {
                p.to_transform()?;
            }
            if !(o.z_center > 0.0) || !(o.radius > 0.0) {
                return Err(Error::InvalidInput(format!("object {i}: z_center and radius must be positive")));
            }
            for f in o.file_refs() {
                if !dir.join(f).is_file() {
                    return Err(Error::InvalidInput(format!("object {i}: referenced file `{f}` does not exist")));
                }
            }
        }
        Ok(())
    }

    pub fn object(&self, index: usize) -> Result<&ObjectRecord> {
        self.objects.get(index).ok_or_else(|| {
            Error::InvalidInput(format!("object index {index} out of range ({} objects)", self.objects.len()))
        })
    }
}

/// Output of `solve` for one object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub category: Category,
    pub score: f64,
    pub pose: PoseJson,
    pub size: [f64; 3],
    pub box_center: [f64; 3],
    pub inlier_count: usize,
    pub inlier_ratio: f64,
    pub z_center: f64,
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<String>,
}

impl PoseRecord {
    pub fn new(category: Category, score: f64, est: &PoseEstimate, z_center: f64, radius: f64) -> Self {
        Self {
            category,
            score,
            pose: PoseJson::from(&est.transform),
            size: est.size.into(),
            box_center: est.box_center.into(),
            inlier_count: est.inlier_count,
            inlier_ratio: est.inlier_ratio,
            z_center,
            radius,
            mesh: None,
            depth: None,
        }
    }
}

/// Pretty JSON with a trailing newline; field order follows the type.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn save_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn load_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
