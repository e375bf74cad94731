//! Value parsers for compound command-line arguments.

use metricpose::synth::PerturbationSpec;
use metricpose::{CameraIntrinsics, SparseDepthObservation};
use metricpose::io::DepthHint;

fn numbers(s: &str, n: usize, what: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("{what}: `{t}` is not a number")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("{what}: expected {n} comma-separated values, got {}", v.len()));
    }
    Ok(v)
}

fn whole(x: f64, what: &str) -> Result<usize, String> {
    if x >= 0.0 && x.fract() == 0.0 && x < u32::MAX as f64 {
        Ok(x as usize)
    } else {
        Err(format!("{what} must be a non-negative integer, got {x}"))
    }
}

/// `fx,fy,cx,cy,w,h`.
pub fn intrinsics(s: &str) -> Result<CameraIntrinsics, String> {
    let v = numbers(s, 6, "intrinsics")?;
    CameraIntrinsics::new(v[0], v[1], v[2], v[3], whole(v[4], "width")?, whole(v[5], "height")?)
        .map_err(|e| e.to_string())
}

/// `auto`, or `u,v,d` with integer pixel coordinates.
pub fn depth_hint(s: &str) -> Result<DepthHint, String> {
    if s.trim() == "auto" {
        return Ok(DepthHint::Nearest);
    }
    let v = numbers(s, 3, "--od")?;
    if v[2].is_nan() || v[2] <= 0.0 {
        return Err(format!("--od depth must be positive, got {}", v[2]));
    }
    Ok(DepthHint::Pixel(SparseDepthObservation { pixel: (whole(v[0], "u")?, whole(v[1], "v")?), depth: v[2] }))
}

/// `key=value` pairs: `z`, `r`, `nocs`, `outliers`, `erode`, `coupled` (0/1).
pub fn perturbation(s: &str) -> Result<PerturbationSpec, String> {
    let mut spec = PerturbationSpec::default();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (key, value) = item.split_once('=').ok_or_else(|| format!("--perturb: `{item}` is not key=value"))?;
        let x: f64 = value.trim().parse().map_err(|_| format!("--perturb: `{value}` is not a number"))?;
        match key.trim() {
            "z" => spec.z_rel_noise = x,
            "r" => spec.r_rel_noise = x,
            "nocs" => spec.nocs_noise_sigma = x,
            "outliers" => spec.nocs_outlier_frac = x,
            "erode" => spec.mask_erosion_px = whole(x, "erode")?,
            "coupled" => spec.radius_follows_depth = x != 0.0,
            other => return Err(format!("--perturb: unknown key `{other}`")),
        }
    }
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}
