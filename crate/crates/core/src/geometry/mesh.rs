use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{minimal_enclosing_sphere, SimilarityTransform, Sphere, Vec3};
use crate::{Error, Result};

/// Bounding-sphere radius of a mesh in the normalized frame.
pub const NORMALIZED_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    /// Centered on the bounding-sphere center, radius 0.5, dimensionless.
    Normalized,
    /// Camera coordinates in meters.
    CameraMetric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    pub frame: Frame,
}

impl TriangleMesh {
    /// Builds a mesh after checking face indices and the frame contract.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>, frame: Frame) -> Result<Self> {
        let mesh = Self { vertices, faces, frame };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        for (i, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&k| k as usize >= n) {
                return Err(Error::InvalidInput(format!("face {i} {f:?} indexes past {n} vertices")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidInput(format!("face {i} {f:?} repeats a vertex")));
            }
        }
        if self.vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidInput("non-finite vertex".into()));
        }
        if self.frame == Frame::Normalized {
            let r = self.max_vertex_norm();
            if r > NORMALIZED_RADIUS + 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "normalized mesh reaches radius {r} about the origin"
                )));
            }
        }
        Ok(())
    }

    fn max_vertex_norm(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn bounding_sphere(&self) -> Option<Sphere> {
        minimal_enclosing_sphere(&self.vertices)
    }

    /// Recenters on the bounding-sphere center and rescales to radius 0.5.
    pub fn normalized(&self) -> Result<TriangleMesh> {
        let sphere = self
            .bounding_sphere()
            .filter(|s| s.radius > 0.0)
            .ok_or_else(|| Error::DegenerateInput("mesh has no spatial extent".into()))?;
        let k = NORMALIZED_RADIUS / sphere.radius;
        let vertices: Vec<Vec3> = self.vertices.iter().map(|v| (v - sphere.center) * k).collect();
        // Guard the last ulp so the frame invariant holds exactly.
        let r = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let vertices = if r > NORMALIZED_RADIUS {
            vertices.into_iter().map(|v| v * (NORMALIZED_RADIUS / r)).collect()
        } else {
            vertices
        };
        TriangleMesh::new(vertices, self.faces.clone(), Frame::Normalized)
    }

    /// Applies `t` to every vertex and retags the frame.
    pub fn transformed(&self, t: &SimilarityTransform, frame: Frame) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|v| t.apply(v)).collect(),
            faces: self.faces.clone(),
            frame,
        }
    }

    /// Concatenates meshes; returns the merged mesh and, per face, the index
    /// of the source mesh.
    pub fn merge(meshes: &[&TriangleMesh], frame: Frame) -> (TriangleMesh, Vec<u32>) {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        let mut owner = Vec::new();
        for (i, m) in meshes.iter().enumerate() {
            let base = vertices.len() as u32;
            vertices.extend_from_slice(&m.vertices);
            faces.extend(m.faces.iter().map(|f| [f[0] + base, f[1] + base, f[2] + base]));
            owner.extend(std::iter::repeat_n(i as u32, m.faces.len()));
        }
        (TriangleMesh { vertices, faces, frame }, owner)
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let f = self.faces[face];
        [self.vertices[f[0] as usize], self.vertices[f[1] as usize], self.vertices[f[2] as usize]]
    }

    /// Unnormalized face normal; its length is twice the face area.
    pub fn face_cross(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(&(c - a))
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| 0.5 * self.face_cross(f).norm()).sum()
    }

    /// Axis-aligned bounds `(min, max)`; `None` when there are no vertices.
    pub fn aabb(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| (lo.inf(v), hi.sup(v))))
    }

    /// Number of edges used by exactly one face (zero for closed meshes).
    pub fn boundary_edge_count(&self) -> usize {
        let mut uses: HashMap<(u32, u32), u32> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *uses.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        uses.values().filter(|&&c| c == 1).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> TriangleMesh {
        TriangleMesh::new(
            vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0), Vec3::new(0.0, 0.0, 2.0)],
            vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
            Frame::CameraMetric,
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_faces() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y()];
        assert!(TriangleMesh::new(v.clone(), vec![[0, 1, 3]], Frame::CameraMetric).is_err());
        assert!(TriangleMesh::new(v.clone(), vec![[0, 1, 1]], Frame::CameraMetric).is_err());
        assert!(TriangleMesh::new(v, vec![[0, 1, 2]], Frame::Normalized).is_err());
    }

    #[test]
    fn normalization_contract() {
        let n = tetra().normalized().unwrap();
        let s = n.bounding_sphere().unwrap();
        assert!((s.radius - 0.5).abs() < 1e-9);
        assert!(s.center.norm() < 1e-9);
        assert!(n.vertices.iter().all(|v| v.norm() <= 0.5));
    }

    #[test]
    fn closed_tetra_has_no_boundary() {
        assert_eq!(tetra().boundary_edge_count(), 0);
        let mut open = tetra();
        open.faces.pop();
        assert_eq!(open.boundary_edge_count(), 3);
    }
}
