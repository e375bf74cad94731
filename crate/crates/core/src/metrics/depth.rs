use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::raster::ImageGrid;
use crate::{Error, Result};

/// δ thresholds: 1.25, 1.25², 1.25³.
pub const DELTA_THRESHOLDS: [f64; 3] = [1.25, 1.5625, 1.953125];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthMetrics {
    /// Meters.
    pub rmse: f64,
    /// Mean absolute error relative to ground truth.
    pub rel: f64,
    /// Percentage of pixels with `max(D/D̂, D̂/D) < τ`, keyed by τ.
    pub delta: BTreeMap<String, f64>,
    pub pixels: usize,
}

/// Running sums over any number of prediction/ground-truth grid pairs.
#[derive(Debug, Clone, Default)]
pub struct DepthAccumulator {
    pixels: usize,
    sq_err: f64,
    rel_err: f64,
    within: [usize; 3],
}

impl DepthAccumulator {
    /// Adds every pixel valid in both grids.
    pub fn add(&mut self, pred: &ImageGrid, gt: &ImageGrid) -> Result<()> {
        if !pred.same_shape(gt) || pred.channels() != 1 || gt.channels() != 1 {
            return Err(Error::InvalidInput("depth grids must share dimensions and have one channel".into()));
        }
        let (pv, gv) = (pred.valid_mask(), gt.valid_mask());
        for (i, (&dp, &dg)) in pred.data().iter().zip(gt.data()).enumerate() {
            if !(pv[i] && gv[i]) {
                continue;
            }
            let (d, g) = (dp as f64, dg as f64);
            self.pixels += 1;
            self.sq_err += (g - d) * (g - d);
            self.rel_err += (g - d).abs() / g;
            let ratio = (d / g).max(g / d);
            for (k, t) in DELTA_THRESHOLDS.iter().enumerate() {
                self.within[k] += (ratio < *t) as usize;
            }
        }
        Ok(())
    }

    pub fn finish(&self) -> Result<DepthMetrics> {
        if self.pixels == 0 {
            return Err(Error::NoValidPixels);
        }
        let n = self.pixels as f64;
        let delta = DELTA_THRESHOLDS
            .iter()
            .zip(self.within)
            .map(|(t, c)| (t.to_string(), 100.0 * c as f64 / n))
            .collect();
        Ok(DepthMetrics { rmse: (self.sq_err / n).sqrt(), rel: self.rel_err / n, delta, pixels: self.pixels })
    }
}

/// RMSE, REL and δ accuracies over pixels valid in both grids.
pub fn depth_metrics(pred: &ImageGrid, gt: &ImageGrid) -> Result<DepthMetrics> {
    let mut acc = DepthAccumulator::default();
    acc.add(pred, gt)?;
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_maps() {
        let g = ImageGrid::filled(8, 6, 1.7);
        let m = depth_metrics(&g, &g).unwrap();
        assert_eq!((m.rmse, m.rel), (0.0, 0.0));
        assert!(m.delta.values().all(|v| *v == 100.0));
    }

    #[test]
    fn constant_offsets() {
        let gt = ImageGrid::filled(8, 6, 2.0);
        let pred = ImageGrid::filled(8, 6, 2.2);
        let m = depth_metrics(&pred, &gt).unwrap();
        // Exact in terms of the stored f32 samples.
        let d = 2.2f32 as f64 - 2.0;
        assert_eq!(m.rmse, d);
        assert_eq!(m.rel, d / 2.0);
        assert!((m.rmse - 0.2).abs() < 1e-6 && (m.rel - 0.1).abs() < 1e-6);
        assert_eq!(m.delta["1.25"], 100.0);

        let m = depth_metrics(&ImageGrid::filled(4, 4, 1.3), &ImageGrid::filled(4, 4, 1.0)).unwrap();
        assert_eq!(m.delta["1.25"], 0.0);
        assert_eq!(m.delta["1.5625"], 100.0);
        assert_eq!(m.delta["1.953125"], 100.0);
    }

    #[test]
    fn no_overlap() {
        let a = ImageGrid::new_invalid(4, 4, 1);
        assert!(matches!(depth_metrics(&a, &ImageGrid::filled(4, 4, 1.0)), Err(Error::NoValidPixels)));
        assert!(depth_metrics(&ImageGrid::filled(4, 3, 1.0), &ImageGrid::filled(4, 4, 1.0)).is_err());
    }
}
