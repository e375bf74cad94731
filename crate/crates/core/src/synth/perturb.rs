use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::ObjectTruth;
use crate::geometry::BoundingBox2D;
use crate::raster::{ImageGrid, Mask};
use crate::{Error, Result};

/// Emulated predictor error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    /// `Z ← Z·(1+ε)` with `ε` uniform in `±z_rel_noise`.
    pub z_rel_noise: f64,
    /// `R ← R·(1+ε)` with `ε` uniform in `±r_rel_noise`.
    pub r_rel_noise: f64,
    /// Standard deviation of additive Gaussian NOCS noise.
    pub nocs_noise_sigma: f64,
    /// Fraction of masked NOCS pixels replaced by uniform outliers.
    pub nocs_outlier_frac: f64,
    pub mask_erosion_px: usize,
    /// Also scale `R` by the depth error, as when both are recovered from
    /// patch-normalized predictions through the same `τ/f` factor.
    pub radius_follows_depth: bool,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            z_rel_noise: 0.0,
            r_rel_noise: 0.0,
            nocs_noise_sigma: 0.0,
            nocs_outlier_frac: 0.0,
            mask_erosion_px: 0,
            radius_follows_depth: true,
        }
    }
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        let frac = |x: f64| (0.0..=1.0).contains(&x);
        if !frac(self.z_rel_noise)
            || !frac(self.r_rel_noise)
            || !frac(self.nocs_outlier_frac)
            || !(self.nocs_noise_sigma >= 0.0 && self.nocs_noise_sigma.is_finite())
        {
            return Err(Error::InvalidInput(format!("invalid perturbation {self:?}")));
        }
        Ok(())
    }
}

/// What the geometric pipeline consumes for one object.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub bbox: BoundingBox2D,
    pub z_center: f64,
    pub radius: f64,
    pub nocs: ImageGrid,
    pub mask: Mask,
    /// Sensor depth of the visible surface.
    pub depth: ImageGrid,
}

impl From<&ObjectTruth> for Observation {
    fn from(t: &ObjectTruth) -> Self {
        Self {
            bbox: t.bbox,
            z_center: t.z_center,
            radius: t.radius,
            nocs: t.nocs.clone(),
            mask: t.mask.clone(),
            depth: t.depth.clone(),
        }
    }
}

fn symmetric(rng: &mut ChaCha8Rng, half_width: f64) -> f64 {
    if half_width > 0.0 {
        rng.random_range(-half_width..=half_width)
    } else {
        0.0
    }
}

/// Applies `spec` deterministically under `seed`. A zero spec returns the
/// input unchanged.
pub fn perturb(obs: &Observation, spec: &PerturbationSpec, seed: u64) -> Result<Observation> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = obs.clone();

    let ez = symmetric(&mut rng, spec.z_rel_noise);
    let er = symmetric(&mut rng, spec.r_rel_noise);
    out.z_center = obs.z_center * (1.0 + ez);
    out.radius = obs.radius * (1.0 + er);
    if spec.radius_follows_depth {
        out.radius *= out.z_center / obs.z_center;
    }

    let pixels: Vec<(usize, usize)> = obs.mask.pixels().filter(|&(u, v)| obs.nocs.is_valid(u, v)).collect();
    if spec.nocs_noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.nocs_noise_sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
        for &(u, v) in &pixels {
            let n = out.nocs.get(u, v).expect("valid pixel");
            let noisy: Vec<f32> =
                n.iter().map(|x| (*x as f64 + normal.sample(&mut rng)).clamp(0.0, 1.0) as f32).collect();
            out.nocs.set(u, v, &noisy);
        }
    }
    let outliers = (spec.nocs_outlier_frac * pixels.len() as f64).round() as usize;
    if outliers > 0 {
        for i in sample(&mut rng, pixels.len(), outliers.min(pixels.len())) {
            let (u, v) = pixels[i];
            let x: [f32; 3] = std::array::from_fn(|_| rng.random::<f32>());
            out.nocs.set(u, v, &x);
        }
    }
    if spec.mask_erosion_px > 0 {
        out.mask = obs.mask.eroded(spec.mask_erosion_px);
    }
    Ok(out)
}
