use crate::geometry::{OrientedBox3D, Vec3};

pub const DEFAULT_IOU_RESOLUTION: usize = 64;

/// 3D IoU: analytic when both boxes are axis-aligned, lattice estimate otherwise.
pub fn iou3d(a: &OrientedBox3D, b: &OrientedBox3D, resolution: usize) -> f64 {
    if a.is_axis_aligned() && b.is_axis_aligned() {
        iou_axis_aligned(a, b)
    } else {
        iou3d_lattice(a, b, resolution)
    }
}

/// Exact IoU of two axis-aligned boxes (rotations ignored).
pub fn iou_axis_aligned(a: &OrientedBox3D, b: &OrientedBox3D) -> f64 {
    let mut inter = 1.0;
    for i in 0..3 {
        let lo = (a.center[i] - a.half_extents[i]).max(b.center[i] - b.half_extents[i]);
        let hi = (a.center[i] + a.half_extents[i]).min(b.center[i] + b.half_extents[i]);
        inter *= (hi - lo).max(0.0);
    }
    let union = a.volume() + b.volume() - inter;
    if union > 0.0 { inter / union } else { 0.0 }
}

/// Counts cell centers of a `resolution³` lattice spanning the union's
/// axis-aligned bounds. The lattice depends only on the unordered pair, so
/// the estimate is exactly symmetric.
pub fn iou3d_lattice(a: &OrientedBox3D, b: &OrientedBox3D, resolution: usize) -> f64 {
    let (alo, ahi) = a.aabb();
    let (blo, bhi) = b.aabb();
    let lo = alo.inf(&blo);
    let hi = ahi.sup(&bhi);
    // Disjoint bounds: nothing to sample.
    if (0..3).any(|i| ahi[i] < blo[i] || bhi[i] < alo[i]) {
        return 0.0;
    }
    let n = resolution.max(1);
    let step = (hi - lo) / n as f64;
    let (ra, rb) = (a.rotation.transpose(), b.rotation.transpose());
    let inside = |rt: &crate::Mat3, bx: &OrientedBox3D, p: &Vec3| {
        let l = rt * (p - bx.center);
        l.x.abs() <= bx.half_extents.x && l.y.abs() <= bx.half_extents.y && l.z.abs() <= bx.half_extents.z
    };
    let (mut both, mut either) = (0u64, 0u64);
    for k in 0..n {
        let z = lo.z + (k as f64 + 0.5) * step.z;
        for j in 0..n {
            let y = lo.y + (j as f64 + 0.5) * step.y;
            for i in 0..n {
                let p = Vec3::new(lo.x + (i as f64 + 0.5) * step.x, y, z);
                let in_a = inside(&ra, a, &p);
                let in_b = inside(&rb, b, &p);
                both += (in_a && in_b) as u64;
                either += (in_a || in_b) as u64;
            }
        }
    }
    if either == 0 { 0.0 } else { both as f64 / either as f64 }
}
