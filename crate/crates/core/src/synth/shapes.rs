use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::geometry::{Frame, TriangleMesh, Vec3};
use crate::{Category, Error, Result};

/// Relative proportions of a parametric primitive; overall scale is removed
/// by normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    /// Extent along x (cylinder/bowl radius, or box width).
    pub width: f64,
    /// Extent along the up axis.
    pub height: f64,
    /// Extent along z for boxes; torus tube radius for the mug handle.
    pub depth: f64,
}

impl ShapeParams {
    pub fn default_for(category: Category) -> Self {
        let (width, height, depth) = match category {
            Category::Bottle => (1.0, 3.2, 0.0),
            Category::Can => (1.0, 2.4, 0.0),
            Category::Bowl => (1.0, 0.6, 0.0),
            Category::Camera => (1.4, 1.0, 0.8),
            Category::Laptop => (1.0, 0.25, 0.8),
            Category::Mug => (1.0, 1.8, 0.14),
        };
        Self { width, height, depth }
    }

    fn validate(&self, category: Category) -> Result<()> {
        let needs_depth = matches!(category, Category::Camera | Category::Laptop | Category::Mug);
        let ok = self.width > 0.0
            && self.height > 0.0
            && self.width.is_finite()
            && self.height.is_finite()
            && self.depth.is_finite()
            && (!needs_depth || self.depth > 0.0);
        if !ok {
            return Err(Error::InvalidInput(format!("invalid shape parameters {self:?} for {category}")));
        }
        Ok(())
    }
}

#[derive(Default)]
struct Builder {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
}

impl Builder {
    fn push(&mut self, v: Vec3) -> u32 {
        self.vertices.push(v);
        (self.vertices.len() - 1) as u32
    }

    fn quad(&mut self, a: u32, b: u32, c: u32, d: u32) {
        self.faces.push([a, b, c]);
        self.faces.push([a, c, d]);
    }

    fn ring(&mut self, radius_x: f64, radius_z: f64, y: f64, segments: usize) -> Vec<u32> {
        (0..segments)
            .map(|k| {
                let a = TAU * k as f64 / segments as f64;
                self.push(Vec3::new(radius_x * a.cos(), y, radius_z * a.sin()))
            })
            .collect()
    }

    /// Side band between two rings of equal length.
    fn band(&mut self, lower: &[u32], upper: &[u32]) {
        let n = lower.len();
        for k in 0..n {
            let j = (k + 1) % n;
            self.quad(lower[k], lower[j], upper[j], upper[k]);
        }
    }

    /// Fan cap anchored at the ring's first vertex; adds no interior vertex.
    fn cap(&mut self, ring: &[u32]) {
        for k in 1..ring.len() - 1 {
            self.faces.push([ring[0], ring[k], ring[k + 1]]);
        }
    }

    fn finish(self) -> Result<TriangleMesh> {
        TriangleMesh::new(self.vertices, self.faces, Frame::CameraMetric)?.normalized()
    }
}

fn capped_cylinder(b: &mut Builder, radius: f64, height: f64, segments: usize) {
    let lower = b.ring(radius, radius, -height / 2.0, segments);
    let upper = b.ring(radius, radius, height / 2.0, segments);
    b.band(&lower, &upper);
    b.cap(&lower);
    b.cap(&upper);
}

fn open_hemisphere(b: &mut Builder, radius: f64, depth: f64, rings: usize, segments: usize) {
    let pole = b.push(Vec3::new(0.0, -depth, 0.0));
    let mut prev: Option<Vec<u32>> = None;
    for k in 1..=rings {
        let theta = FRAC_PI_2 * k as f64 / rings as f64;
        let ring = b.ring(radius * theta.sin(), radius * theta.sin(), -depth * theta.cos(), segments);
        match &prev {
            None => {
                for i in 0..segments {
                    b.faces.push([pole, ring[(i + 1) % segments], ring[i]]);
                }
            }
            Some(p) => b.band(p, &ring),
        }
        prev = Some(ring);
    }
}

fn cuboid(b: &mut Builder, half: Vec3) {
    let idx: Vec<u32> = (0..8)
        .map(|i| {
            let s = |bit: usize| if i & bit == 0 { -1.0 } else { 1.0 };
            b.push(Vec3::new(s(1) * half.x, s(2) * half.y, s(4) * half.z))
        })
        .collect();
    let faces = [[0, 2, 3, 1], [4, 5, 7, 6], [0, 1, 5, 4], [2, 6, 7, 3], [0, 4, 6, 2], [1, 3, 7, 5]];
    for f in faces {
        b.quad(idx[f[0]], idx[f[1]], idx[f[2]], idx[f[3]]);
    }
}

/// Torus in the xy plane around `center`.
fn torus(b: &mut Builder, center: Vec3, major: f64, minor: f64, segments: usize, tube_segments: usize) {
    let rings: Vec<Vec<u32>> = (0..segments)
        .map(|i| {
            let u = TAU * i as f64 / segments as f64;
            (0..tube_segments)
                .map(|j| {
                    let w = TAU * j as f64 / tube_segments as f64;
                    let r = major + minor * w.cos();
                    b.push(center + Vec3::new(r * u.cos(), r * u.sin(), minor * w.sin()))
                })
                .collect()
        })
        .collect();
    for i in 0..segments {
        let next = &rings[(i + 1) % segments];
        for j in 0..tube_segments {
            let k = (j + 1) % tube_segments;
            b.quad(rings[i][j], next[j], next[k], rings[i][k]);
        }
    }
}

/// Parametric stand-in for each category, normalized to bounding-sphere
/// radius 0.5 with +y up. `subdivisions` controls tessellation density.
pub fn make_category_mesh(category: Category, params: &ShapeParams, subdivisions: usize) -> Result<TriangleMesh> {
    params.validate(category)?;
    let sub = subdivisions.max(1);
    let segments = (8 * sub).max(8);
    let mut b = Builder::default();
    match category {
        Category::Bottle | Category::Can => capped_cylinder(&mut b, params.width, params.height, segments),
        Category::Bowl => open_hemisphere(&mut b, params.width, params.height, (2 * sub).max(2), segments),
        Category::Camera | Category::Laptop => {
            cuboid(&mut b, Vec3::new(params.width, params.height, params.depth) / 2.0)
        }
        Category::Mug => {
            capped_cylinder(&mut b, params.width, params.height, segments);
            let major = 0.3 * params.height;
            torus(&mut b, Vec3::new(params.width, 0.0, 0.0), major, params.depth, segments, (segments / 2).max(6));
        }
    }
    b.finish()
}

/// [`make_category_mesh`] with a category given by name.
pub fn make_category_mesh_named(name: &str, subdivisions: usize) -> Result<TriangleMesh> {
    let category: Category = name.parse()?;
    make_category_mesh(category, &ShapeParams::default_for(category), subdivisions)
}
