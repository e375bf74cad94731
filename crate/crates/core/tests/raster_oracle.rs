use metricpose::raster::rasterize;
use metricpose::{render_depth, CameraIntrinsics, Frame, TriangleMesh, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn camera() -> CameraIntrinsics {
    CameraIntrinsics::new(150.0, 150.0, 79.5, 59.5, 160, 120).unwrap()
}

fn random_triangles(seed: u64, count: usize) -> TriangleMesh {
    let k = camera();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for i in 0..count as u32 {
        let z = rng.random_range(1.0..4.0);
        let center = k.backproject(rng.random_range(-10.0..170.0), rng.random_range(-10.0..130.0), z);
        for _ in 0..3 {
            let d = Vec3::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
            vertices.push(center + d);
        }
        faces.push([3 * i, 3 * i + 1, 3 * i + 2]);
    }
    TriangleMesh::new(vertices, faces, Frame::CameraMetric).unwrap()
}

/// Möller–Trumbore; returns the ray parameter and the smallest barycentric.
fn intersect(dir: &Vec3, tri: [Vec3; 3]) -> Option<(f64, f64)> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 {
        return None;
    }
    let s = -tri[0];
    let u = s.dot(&p) / det;
    let q = s.cross(&e1);
    let v = dir.dot(&q) / det;
    let t = e2.dot(&q) / det;
    let w = 1.0 - u - v;
    let margin = u.min(v).min(w);
    (margin >= -1e-9 && t > 0.0).then_some((t, margin))
}

#[test]
fn depth_matches_ray_casting() {
    let k = camera();
    let mesh = random_triangles(42, 500);
    let frags = rasterize(&mesh, &k).unwrap();
    let mut compared = 0;
    for v in 0..k.height {
        for u in 0..k.width {
            // Ray with unit z component, so the ray parameter is the depth.
            let dir = Vec3::new((u as f64 + 0.5 - k.cx) / k.fx, (v as f64 + 0.5 - k.cy) / k.fy, 1.0);
            let mut best: Option<(f64, f64)> = None;
            let mut ambiguous = false;
            for f in 0..mesh.faces.len() {
                if let Some((t, margin)) = intersect(&dir, mesh.triangle(f)) {
                    if margin < 1e-9 {
                        ambiguous = true;
                    }
                    if best.is_none_or(|(b, _)| t < b) {
                        best = Some((t, margin));
                    }
                }
            }
            match (frags.at(u, v), best) {
                (Some((_, d, _)), Some((t, _))) => {
                    if !ambiguous {
                        assert!((d - t).abs() <= 1e-6 * t, "pixel ({u},{v}): raster {d} oracle {t}");
                        compared += 1;
                    }
                }
                (None, None) => {}
                (got, want) => assert!(ambiguous, "pixel ({u},{v}) coverage differs: {got:?} vs {want:?}"),
            }
        }
    }
    assert!(compared > 5_000, "only {compared} pixels compared");
}

#[test]
fn occlusion_composes_as_pixelwise_minimum() {
    let k = camera();
    for seed in 0..5 {
        let a = random_triangles(seed, 60);
        let b = random_triangles(seed + 1000, 60);
        let (ab, _) = TriangleMesh::merge(&[&a, &b], Frame::CameraMetric);
        let (da, db, dab) = (render_depth(&a, &k).unwrap(), render_depth(&b, &k).unwrap(), render_depth(&ab, &k).unwrap());
        for v in 0..k.height {
            for u in 0..k.width {
                let want = match (da.value(u, v), db.value(u, v)) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                };
                assert_eq!(dab.value(u, v), want, "seed {seed} pixel ({u},{v})");
            }
        }
    }
}

#[test]
fn output_is_independent_of_thread_count() {
    let k = camera();
    let mesh = random_triangles(7, 300);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| render_depth(&mesh, &k).unwrap());
    let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap().install(|| render_depth(&mesh, &k).unwrap());
    assert_eq!(one, many);
}
