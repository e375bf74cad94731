//! Minimal enclosing sphere (Welzl's algorithm, iterative move-to-front form).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

impl Sphere {
    fn contains(&self, p: &Vec3, slack: f64) -> bool {
        (p - self.center).norm() <= self.radius + slack
    }

    fn through_two(a: &Vec3, b: &Vec3) -> Sphere {
        let center = 0.5 * (a + b);
        Sphere { center, radius: (a - center).norm() }
    }

    /// Smallest sphere with all three points on its surface: the circumcircle.
    fn through_three(a: &Vec3, b: &Vec3, c: &Vec3) -> Option<Sphere> {
        let ab = b - a;
        let ac = c - a;
        let n = ab.cross(&ac);
        let denom = 2.0 * n.norm_squared();
        if denom <= f64::EPSILON * ab.norm_squared() * ac.norm_squared() {
            return None;
        }
        let offset = (ac.norm_squared() * n.cross(&ab) + ab.norm_squared() * ac.cross(&n)) / denom;
        Some(Sphere { center: a + offset, radius: offset.norm() })
    }

    fn through_four(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> Option<Sphere> {
        let m = Mat3::from_rows(&[(b - a).transpose(), (c - a).transpose(), (d - a).transpose()]);
        let rhs = 0.5 * Vec3::new((b - a).norm_squared(), (c - a).norm_squared(), (d - a).norm_squared());
        let offset = m.lu().solve(&rhs)?;
        if !offset.iter().all(|v| v.is_finite()) {
            return None;
        }
        Some(Sphere { center: a + offset, radius: offset.norm() })
    }

    /// Fallback when the exact support sphere is numerically unavailable:
    /// the smallest of the candidate spheres that covers every support point.
    fn smallest_covering(support: &[Vec3]) -> Sphere {
        let mut best: Option<Sphere> = None;
        let mut consider = |s: Sphere| {
            let slack = 1e-12 * s.radius.max(1.0);
            if support.iter().all(|p| s.contains(p, slack)) && best.is_none_or(|b| s.radius < b.radius) {
                best = Some(s);
            }
        };
        for i in 0..support.len() {
            for j in i + 1..support.len() {
                consider(Sphere::through_two(&support[i], &support[j]));
                for k in j + 1..support.len() {
                    if let Some(s) = Sphere::through_three(&support[i], &support[j], &support[k]) {
                        consider(s);
                    }
                }
            }
        }
        best.unwrap_or_else(|| {
            let center = support.iter().sum::<Vec3>() / support.len() as f64;
            let radius = support.iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
            Sphere { center, radius }
        })
    }
}

fn slack(s: &Sphere) -> f64 {
    1e-12 * s.radius.max(1.0)
}

fn with_three(points: &[Vec3], q1: &Vec3, q2: &Vec3, q3: &Vec3) -> Sphere {
    let mut ball = Sphere::through_three(q1, q2, q3)
        .unwrap_or_else(|| Sphere::smallest_covering(&[*q1, *q2, *q3]));
    for p in points {
        if !ball.contains(p, slack(&ball)) {
            ball = Sphere::through_four(q1, q2, q3, p)
                .unwrap_or_else(|| Sphere::smallest_covering(&[*q1, *q2, *q3, *p]));
        }
    }
    ball
}

fn with_two(points: &[Vec3], q1: &Vec3, q2: &Vec3) -> Sphere {
    let mut ball = Sphere::through_two(q1, q2);
    for (k, p) in points.iter().enumerate() {
        if !ball.contains(p, slack(&ball)) {
            ball = with_three(&points[..k], q1, q2, p);
        }
    }
    ball
}

fn with_one(points: &[Vec3], q: &Vec3) -> Sphere {
    let mut ball = Sphere { center: *q, radius: 0.0 };
    for (j, p) in points.iter().enumerate() {
        if !ball.contains(p, slack(&ball)) {
            ball = with_two(&points[..j], q, p);
        }
    }
    ball
}

/// Smallest sphere enclosing every point. The returned radius is the exact
/// maximum distance from the computed center, so every input point satisfies
/// `‖p − center‖ ≤ radius`. Returns `None` for an empty slice.
pub fn minimal_enclosing_sphere(points: &[Vec3]) -> Option<Sphere> {
    let first = points.first()?;
    let mut pts = points.to_vec();
    // Fixed-seed shuffle keeps the expected running time linear on
    // structured inputs while the result stays deterministic.
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed_5fe3));
    let mut ball = Sphere { center: *first, radius: 0.0 };
    for i in 0..pts.len() {
        if !ball.contains(&pts[i], slack(&ball)) {
            let (head, tail) = pts.split_at(i);
            ball = with_one(head, &tail[0]);
        }
    }
    let radius = points.iter().map(|p| (p - ball.center).norm()).fold(0.0, f64::max);
    Some(Sphere { center: ball.center, radius })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Smallest sphere among all those determined by 1–4 input points that
    /// still contain every point.
    fn brute_force(points: &[Vec3]) -> f64 {
        let n = points.len();
        let mut best = f64::INFINITY;
        let mut consider = |s: Option<Sphere>| {
            if let Some(s) = s {
                if points.iter().all(|p| (p - s.center).norm() <= s.radius + 1e-9) {
                    best = best.min(s.radius);
                }
            }
        };
        for i in 0..n {
            for j in i + 1..n {
                consider(Some(Sphere::through_two(&points[i], &points[j])));
                for k in j + 1..n {
                    consider(Sphere::through_three(&points[i], &points[j], &points[k]));
                    for l in k + 1..n {
                        consider(Sphere::through_four(&points[i], &points[j], &points[k], &points[l]));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn matches_brute_force_on_small_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..10 {
            for _ in 0..40 {
                let pts: Vec<Vec3> = (0..n)
                    .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                let s = minimal_enclosing_sphere(&pts).unwrap();
                let b = brute_force(&pts);
                assert!((s.radius - b).abs() < 1e-9, "n={n}: {} vs {b}", s.radius);
            }
        }
    }

    #[test]
    fn cocircular_and_spherical_points() {
        // Regular 64-gon rings on a sphere: many degenerate (cocircular) subsets.
        let mut pts = Vec::new();
        for ring in [-0.6f64, 0.6] {
            let r = (1.0 - ring * ring).sqrt();
            for i in 0..64 {
                let a = i as f64 / 64.0 * std::f64::consts::TAU;
                pts.push(Vec3::new(r * a.cos(), ring, r * a.sin()) + Vec3::new(3.0, -1.0, 2.0));
            }
        }
        let s = minimal_enclosing_sphere(&pts).unwrap();
        assert!((s.radius - 1.0).abs() < 1e-9);
        assert!((s.center - Vec3::new(3.0, -1.0, 2.0)).norm() < 1e-9);
    }

    #[test]
    fn single_point_and_empty() {
        assert!(minimal_enclosing_sphere(&[]).is_none());
        let s = minimal_enclosing_sphere(&[Vec3::new(1.0, 2.0, 3.0)]).unwrap();
        assert_eq!(s.radius, 0.0);
    }
}
