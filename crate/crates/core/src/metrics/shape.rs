use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{TriangleMesh, Vec3};
use crate::{Error, Result};

pub const DEFAULT_SURFACE_SAMPLES: usize = 10_000;

/// Points sampled on a mesh surface with their unit face normals.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    pub points: Vec<Vec3>,
    pub normals: Vec<Vec3>,
}

/// Area-weighted uniform surface sampling.
pub fn sample_surface(mesh: &TriangleMesh, count: usize, seed: u64) -> Result<SurfaceSample> {
    let mut cumulative = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0;
    for f in 0..mesh.faces.len() {
        total += 0.5 * mesh.face_cross(f).norm();
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::DegenerateInput("mesh has zero surface area".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    let mut normals = Vec::with_capacity(count);
    for _ in 0..count {
        let target = rng.random::<f64>() * total;
        let face = cumulative.partition_point(|&c| c <= target).min(mesh.faces.len() - 1);
        let [a, b, c] = mesh.triangle(face);
        let (r1, r2): (f64, f64) = (rng.random(), rng.random());
        let s = r1.sqrt();
        points.push((1.0 - s) * a + s * (1.0 - r2) * b + s * r2 * c);
        normals.push(mesh.face_cross(face).normalize());
    }
    Ok(SurfaceSample { points, normals })
}

/// Static 3-d tree for exact nearest-neighbour queries.
#[derive(Debug, Clone)]
pub struct KdTree<'a> {
    points: &'a [Vec3],
    // Implicit balanced tree over a permutation of point indices.
    order: Vec<usize>,
}

impl<'a> KdTree<'a> {
    pub fn new(points: &'a [Vec3]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        Self::build(points, &mut order, 0);
        Self { points, order }
    }

    fn build(points: &[Vec3], idx: &mut [usize], depth: usize) {
        if idx.len() <= 1 {
            return;
        }
        let axis = depth % 3;
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| points[a][axis].total_cmp(&points[b][axis]));
        let (left, right) = idx.split_at_mut(mid);
        Self::build(points, left, depth + 1);
        Self::build(points, &mut right[1..], depth + 1);
    }

    /// `(index, squared distance)` of the nearest point; `None` when empty.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        let mut best = None;
        self.search(&self.order, 0, q, &mut best);
        best
    }

    fn search(&self, idx: &[usize], depth: usize, q: &Vec3, best: &mut Option<(usize, f64)>) {
        if idx.is_empty() {
            return;
        }
        let mid = idx.len() / 2;
        let pi = idx[mid];
        let p = &self.points[pi];
        let d = dist2(p, q);
        if best.is_none_or(|(bi, bd)| d < bd || (d == bd && pi < bi)) {
            *best = Some((pi, d));
        }
        let axis = depth % 3;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff < 0.0 { (&idx[..mid], &idx[mid + 1..]) } else { (&idx[mid + 1..], &idx[..mid]) };
        self.search(near, depth + 1, q, best);
        if best.is_none_or(|(_, bd)| diff * diff <= bd) {
            self.search(far, depth + 1, q, best);
        }
    }
}

fn dist2(a: &Vec3, b: &Vec3) -> f64 {
    let d = a - b;
    d.x * d.x + d.y * d.y + d.z * d.z
}

fn mean_nearest_sq(from: &[Vec3], tree: &KdTree) -> f64 {
    from.iter().map(|p| tree.nearest(p).expect("non-empty").1).sum::<f64>() / from.len() as f64
}

/// `mean_a min_b ‖a−b‖² + mean_b min_a ‖a−b‖²` (raw, not rescaled).
pub fn chamfer_distance(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("chamfer distance needs two non-empty point sets".into()));
    }
    let ta = KdTree::new(a);
    let tb = KdTree::new(b);
    Ok(mean_nearest_sq(a, &tb) + mean_nearest_sq(b, &ta))
}

/// Mean of `|n_x · n_nn(x)|` over both directions, averaged.
pub fn normal_consistency(a: &SurfaceSample, b: &SurfaceSample) -> Result<f64> {
    if a.points.is_empty() || b.points.is_empty() {
        return Err(Error::InvalidInput("normal consistency needs two non-empty samples".into()));
    }
    let one_way = |from: &SurfaceSample, to: &SurfaceSample| {
        let tree = KdTree::new(&to.points);
        from.points
            .iter()
            .zip(&from.normals)
            .map(|(p, n)| {
                let (j, _) = tree.nearest(p).expect("non-empty");
                n.dot(&to.normals[j]).abs()
            })
            .sum::<f64>()
            / from.points.len() as f64
    };
    Ok(0.5 * (one_way(a, b) + one_way(b, a)))
}
