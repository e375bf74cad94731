//! Deterministic z-buffer rasterizer for depth and per-vertex attribute maps.
//!
//! Pixel centers sit at `(u + 0.5, v + 0.5)`. Depth and attributes are
//! interpolated perspective-correctly (linear in `1/z` across the projected
//! triangle), faces are never culled, and pixels exactly on an edge shared by
//! two triangles belong to exactly one of them (top-left rule). Rows are
//! processed in independent bands, so output does not depend on the thread
//! count.

use rayon::prelude::*;

use crate::geometry::{CameraIntrinsics, TriangleMesh, Vec3};
use crate::{Error, Result};

/// Vertices must lie strictly beyond this depth (meters).
pub const NEAR_PLANE: f64 = 1e-4;

const BAND_ROWS: usize = 16;
const NO_TRIANGLE: u32 = u32::MAX;

/// Row-major float raster with 1 or 3 channels and a per-pixel validity mask.
/// Invalid pixels hold zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
    valid: Vec<bool>,
}

impl ImageGrid {
    pub fn new_invalid(width: usize, height: usize, channels: usize) -> Self {
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        Self {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
            valid: vec![false; width * height],
        }
    }

    /// Builds a grid from raw samples; invalid pixels are zeroed.
    pub fn from_parts(width: usize, height: usize, channels: usize, mut data: Vec<f32>, valid: Vec<bool>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Format(format!("unsupported channel count {channels}")));
        }
        if data.len() != width * height * channels || valid.len() != width * height {
            return Err(Error::Format(format!(
                "payload of {} samples / {} flags does not match {width}x{height}x{channels}",
                data.len(),
                valid.len()
            )));
        }
        for (i, ok) in valid.iter().enumerate() {
            if !ok {
                data[i * channels..(i + 1) * channels].fill(0.0);
            }
        }
        Ok(Self { width, height, channels, data, valid })
    }

    /// Constant-valued 1-channel grid, every pixel valid.
    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self { width, height, channels: 1, data: vec![value; width * height], valid: vec![true; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn channels(&self) -> usize {
        self.channels
    }
    pub fn data(&self) -> &[f32] {
        &self.data
    }
    pub fn valid_mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn same_shape(&self, other: &ImageGrid) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn is_valid(&self, u: usize, v: usize) -> bool {
        u < self.width && v < self.height && self.valid[v * self.width + u]
    }

    pub fn get(&self, u: usize, v: usize) -> Option<&[f32]> {
        if !self.is_valid(u, v) {
            return None;
        }
        let i = (v * self.width + u) * self.channels;
        Some(&self.data[i..i + self.channels])
    }

    /// First channel as `f64`, if valid.
    pub fn value(&self, u: usize, v: usize) -> Option<f64> {
        self.get(u, v).map(|s| s[0] as f64)
    }

    pub fn set(&mut self, u: usize, v: usize, values: &[f32]) {
        assert_eq!(values.len(), self.channels);
        let p = v * self.width + u;
        self.valid[p] = true;
        self.data[p * self.channels..(p + 1) * self.channels].copy_from_slice(values);
    }

    pub fn invalidate(&mut self, u: usize, v: usize) {
        let p = v * self.width + u;
        self.valid[p] = false;
        self.data[p * self.channels..(p + 1) * self.channels].fill(0.0);
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Validity as a standalone mask.
    pub fn mask(&self) -> Mask {
        Mask { width: self.width, height: self.height, data: self.valid.clone() }
    }
}

/// Per-pixel boolean mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![false; width * height] }
    }

    pub fn get(&self, u: usize, v: usize) -> bool {
        u < self.width && v < self.height && self.data[v * self.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, on: bool) {
        self.data[v * self.width + u] = on;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|v| **v).count()
    }

    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, on)| **on)
            .map(|(i, _)| (i % self.width, i / self.width))
    }

    /// Keeps pixels whose whole disk of `radius` pixels lies inside the mask.
    pub fn eroded(&self, radius: usize) -> Mask {
        if radius == 0 {
            return self.clone();
        }
        let r = radius as i64;
        let mut out = Mask::new(self.width, self.height);
        for (u, v) in self.pixels() {
            let mut keep = true;
            'disk: for dv in -r..=r {
                for du in -r..=r {
                    if du * du + dv * dv > r * r {
                        continue;
                    }
                    let (x, y) = (u as i64 + du, v as i64 + dv);
                    if x < 0 || y < 0 || !self.get(x as usize, y as usize) {
                        keep = false;
                        break 'disk;
                    }
                }
            }
            if keep {
                out.set(u, v, true);
            }
        }
        out
    }

    /// Encodes the mask as a 1-channel grid (1.0 inside, invalid outside).
    pub fn to_grid(&self) -> ImageGrid {
        let data = self.data.iter().map(|on| if *on { 1.0 } else { 0.0 }).collect();
        ImageGrid::from_parts(self.width, self.height, 1, data, self.data.clone()).expect("consistent shape")
    }

    pub fn from_grid(grid: &ImageGrid) -> Mask {
        grid.mask()
    }
}

/// Result of rasterizing a mesh: the nearest face per pixel together with its
/// depth and perspective-correct barycentric weights.
#[derive(Debug, Clone)]
pub struct Fragments {
    pub width: usize,
    pub height: usize,
    depth: Vec<f64>,
    triangle: Vec<u32>,
    weights: Vec<[f64; 3]>,
}

impl Fragments {
    /// `(face index, depth, weights)` at a pixel, if covered.
    pub fn at(&self, u: usize, v: usize) -> Option<(usize, f64, [f64; 3])> {
        let i = v * self.width + u;
        let t = self.triangle[i];
        (t != NO_TRIANGLE).then(|| (t as usize, self.depth[i], self.weights[i]))
    }

    pub fn covered_count(&self) -> usize {
        self.triangle.iter().filter(|t| **t != NO_TRIANGLE).count()
    }

    pub fn depth_grid(&self) -> ImageGrid {
        let mut g = ImageGrid::new_invalid(self.width, self.height, 1);
        for v in 0..self.height {
            for u in 0..self.width {
                if let Some((_, d, _)) = self.at(u, v) {
                    g.set(u, v, &[d as f32]);
                }
            }
        }
        g
    }

    /// Interpolates a per-vertex attribute of `mesh` at every covered pixel.
    pub fn attribute_grid(&self, mesh: &TriangleMesh, per_vertex: &[Vec3]) -> ImageGrid {
        let mut g = ImageGrid::new_invalid(self.width, self.height, 3);
        for v in 0..self.height {
            for u in 0..self.width {
                if let Some((t, _, w)) = self.at(u, v) {
                    let f = mesh.faces[t];
                    let a = w[0] * per_vertex[f[0] as usize]
                        + w[1] * per_vertex[f[1] as usize]
                        + w[2] * per_vertex[f[2] as usize];
                    g.set(u, v, &[a.x as f32, a.y as f32, a.z as f32]);
                }
            }
        }
        g
    }
}

struct Setup {
    face: u32,
    // Screen positions, reordered so the signed area is positive.
    p: [(f64, f64); 3],
    // Original vertex slot of each reordered vertex.
    slot: [usize; 3],
    inv_z: [f64; 3],
    area: f64,
    min: (f64, f64),
    max: (f64, f64),
}

fn edge(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (p.0 - a.0) * (b.1 - a.1) - (p.1 - a.1) * (b.0 - a.0)
}

/// Opposite traversal directions of a shared edge always disagree here, so a
/// pixel center lying exactly on it is claimed by one face only.
fn is_top_left(a: (f64, f64), b: (f64, f64)) -> bool {
    let dx = b.0 - a.0;
    let dy = b.1 - a.1;
    dy < 0.0 || (dy == 0.0 && dx > 0.0)
}

fn inside(w: f64, a: (f64, f64), b: (f64, f64)) -> bool {
    w > 0.0 || (w == 0.0 && is_top_left(a, b))
}

fn setup_triangles(mesh: &TriangleMesh, k: &CameraIntrinsics) -> Result<Vec<Setup>> {
    if let Some(v) = mesh.vertices.iter().find(|v| !(v.z > NEAR_PLANE)) {
        return Err(Error::InvalidInput(format!("vertex {v:?} is not in front of the near plane")));
    }
    let screen: Vec<(f64, f64)> = mesh.vertices.iter().map(|v| k.project(v)).collect();
    let mut out = Vec::with_capacity(mesh.faces.len());
    for (fi, f) in mesh.faces.iter().enumerate() {
        let idx = [f[0] as usize, f[1] as usize, f[2] as usize];
        let mut slot = [0, 1, 2];
        let mut area = edge(screen[idx[0]], screen[idx[1]], screen[idx[2]]);
        if area == 0.0 || !area.is_finite() {
            continue;
        }
        if area < 0.0 {
            slot = [0, 2, 1];
            area = -area;
        }
        let p = slot.map(|s| screen[idx[s]]);
        let inv_z = slot.map(|s| 1.0 / mesh.vertices[idx[s]].z);
        let min = (p[0].0.min(p[1].0).min(p[2].0), p[0].1.min(p[1].1).min(p[2].1));
        let max = (p[0].0.max(p[1].0).max(p[2].0), p[0].1.max(p[1].1).max(p[2].1));
        out.push(Setup { face: fi as u32, p, slot, inv_z, area, min, max });
    }
    Ok(out)
}

/// Index range of pixels whose centers can fall in `[lo, hi]`.
fn pixel_span(lo: f64, hi: f64, limit: usize) -> Option<(usize, usize)> {
    let first = (lo - 0.5).ceil().max(0.0);
    let last = (hi - 0.5).floor().min(limit as f64 - 1.0);
    (first <= last).then_some((first as usize, last as usize))
}

struct Band {
    depth: Vec<f64>,
    triangle: Vec<u32>,
    weights: Vec<[f64; 3]>,
}

fn render_band(setups: &[Setup], width: usize, row0: usize, row1: usize) -> Band {
    let n = width * (row1 - row0);
    let mut band = Band { depth: vec![f64::INFINITY; n], triangle: vec![NO_TRIANGLE; n], weights: vec![[0.0; 3]; n] };
    for s in setups {
        if s.max.1 < row0 as f64 || s.min.1 > row1 as f64 {
            continue;
        }
        let Some((v0, v1)) = pixel_span(s.min.1, s.max.1, row1) else { continue };
        let v0 = v0.max(row0);
        let Some((u0, u1)) = pixel_span(s.min.0, s.max.0, width) else { continue };
        for v in v0..=v1 {
            let py = v as f64 + 0.5;
            for u in u0..=u1 {
                let q = (u as f64 + 0.5, py);
                let w0 = edge(s.p[1], s.p[2], q);
                let w1 = edge(s.p[2], s.p[0], q);
                let w2 = edge(s.p[0], s.p[1], q);
                if !(inside(w0, s.p[1], s.p[2]) && inside(w1, s.p[2], s.p[0]) && inside(w2, s.p[0], s.p[1])) {
                    continue;
                }
                let l = [w0 / s.area, w1 / s.area, w2 / s.area];
                let inv_z = l[0] * s.inv_z[0] + l[1] * s.inv_z[1] + l[2] * s.inv_z[2];
                let z = 1.0 / inv_z;
                let i = (v - row0) * width + u;
                if z < band.depth[i] {
                    band.depth[i] = z;
                    band.triangle[i] = s.face;
                    let mut w = [0.0; 3];
                    for k in 0..3 {
                        w[s.slot[k]] = l[k] * s.inv_z[k] * z;
                    }
                    band.weights[i] = w;
                }
            }
        }
    }
    band
}

/// Rasterizes `mesh` (camera-frame, meters) at the full image resolution.
pub fn rasterize(mesh: &TriangleMesh, intrinsics: &CameraIntrinsics) -> Result<Fragments> {
    intrinsics.validate()?;
    let setups = setup_triangles(mesh, intrinsics)?;
    let (width, height) = (intrinsics.width, intrinsics.height);
    let bands: Vec<Band> = (0..height.div_ceil(BAND_ROWS))
        .into_par_iter()
        .map(|b| render_band(&setups, width, b * BAND_ROWS, ((b + 1) * BAND_ROWS).min(height)))
        .collect();
    let mut frags = Fragments {
        width,
        height,
        depth: Vec::with_capacity(width * height),
        triangle: Vec::with_capacity(width * height),
        weights: Vec::with_capacity(width * height),
    };
    for b in bands {
        frags.depth.extend(b.depth);
        frags.triangle.extend(b.triangle);
        frags.weights.extend(b.weights);
    }
    Ok(frags)
}

/// Depth of the nearest surface at every covered pixel.
pub fn render_depth(mesh: &TriangleMesh, intrinsics: &CameraIntrinsics) -> Result<ImageGrid> {
    let frags = rasterize(mesh, intrinsics)?;
    if frags.covered_count() == 0 {
        return Err(Error::EmptyRender);
    }
    Ok(frags.depth_grid())
}

/// Perspective-correct interpolation of `per_vertex` on the nearest surface.
pub fn render_attributes(mesh: &TriangleMesh, per_vertex: &[Vec3], intrinsics: &CameraIntrinsics) -> Result<ImageGrid> {
    if per_vertex.len() != mesh.vertices.len() {
        return Err(Error::InvalidInput(format!(
            "{} attributes for {} vertices",
            per_vertex.len(),
            mesh.vertices.len()
        )));
    }
    let frags = rasterize(mesh, intrinsics)?;
    if frags.covered_count() == 0 {
        return Err(Error::EmptyRender);
    }
    Ok(frags.attribute_grid(mesh, per_vertex))
}

/// Camera-frame point of every valid depth pixel, taken at the pixel center.
pub fn backproject_grid(depth: &ImageGrid, intrinsics: &CameraIntrinsics) -> Vec<((usize, usize), Vec3)> {
    let mut out = Vec::new();
    for v in 0..depth.height() {
        for u in 0..depth.width() {
            if let Some(d) = depth.value(u, v) {
                out.push(((u, v), intrinsics.backproject(u as f64 + 0.5, v as f64 + 0.5, d)));
            }
        }
    }
    out
}
