//! Sup-norm percentile bootstrap band for a kernel density estimate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{DensityGrid, KernelWindows, Sample};
use crate::error::{Error, Result};

/// Bandwidth of the band estimate relative to the cross-validated one.
pub const UNDERSMOOTHING: f64 = 0.7;
pub const MIN_REPLICATES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBand {
    pub lower: DensityGrid,
    pub upper: DensityGrid,
    pub level: f64,
    /// The centre curve the band is built around.
    pub estimate: DensityGrid,
    /// Half-width `q` of the band before clipping the lower curve at zero.
    pub half_width: f64,
}

impl ConfidenceBand {
    /// Band `[max(f - q, 0), f + q]` around a given curve.
    pub fn around(estimate: DensityGrid, half_width: f64, level: f64) -> Result<Self> {
        if !(half_width >= 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid half width {half_width}")));
        }
        let lower = estimate.map(|v| (v - half_width).max(0.0))?;
        let upper = estimate.map(|v| v + half_width)?;
        Ok(Self {
            lower,
            upper,
            level,
            estimate,
            half_width,
        })
    }

    /// Explicit lower and upper curves on shared points.
    pub fn from_curves(lower: DensityGrid, upper: DensityGrid, level: f64) -> Result<Self> {
        if !lower.same_points(&upper) {
            return Err(Error::InvalidGrid("band curves must share grid points".into()));
        }
        if lower.values().iter().zip(upper.values()).any(|(l, u)| l > u) {
            return Err(Error::InvalidArgument("lower band curve exceeds upper".into()));
        }
        let estimate = lower.with_values(
            lower
                .values()
                .iter()
                .zip(upper.values())
                .map(|(l, u)| 0.5 * (l + u))
                .collect(),
        )?;
        let half_width = lower
            .values()
            .iter()
            .zip(upper.values())
            .map(|(l, u)| 0.5 * (u - l))
            .fold(0.0, f64::max);
        Ok(Self {
            lower,
            upper,
            level,
            estimate,
            half_width,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandOptions {
    pub alpha: f64,
    pub replicates: usize,
    /// Multiplies the supplied bandwidth before smoothing.
    pub undersmoothing: f64,
    pub seed: u64,
}

impl Default for BandOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            replicates: 500,
            undersmoothing: UNDERSMOOTHING,
            seed: 0,
        }
    }
}

impl BandOptions {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.replicates < MIN_REPLICATES {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_REPLICATES} bootstrap replicates, got {}",
                self.replicates
            )));
        }
        if !(self.undersmoothing > 0.0 && self.undersmoothing.is_finite()) {
            return Err(Error::InvalidArgument("undersmoothing factor must be > 0".into()));
        }
        Ok(())
    }
}

/// Sup-norm deviations `max_t |f*_b(t) - f(t)|` of `replicates` resamples.
///
/// Replicate `b` draws from its own ChaCha stream keyed by `(seed, b)`, so
/// the result does not depend on scheduling. The sample is put in sorted
/// order first, which makes the draws invariant under permuting the data.
pub fn bootstrap_deviations(
    sample: &Sample,
    points: &[f64],
    bandwidth: f64,
    boundary: Option<f64>,
    replicates: usize,
    seed: u64,
) -> Result<(DensityGrid, Vec<f64>)> {
    let sorted = Sample::new(sample.sorted())?;
    let windows = KernelWindows::new(&sorted, bandwidth, points, boundary)?;
    let center = windows.evaluate_full();
    let n = sorted.len();
    let devs: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut counts = vec![0u32; n];
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1;
            }
            windows
                .evaluate(&counts)
                .iter()
                .zip(&center)
                .map(|(a, c)| (a - c).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok((DensityGrid::new(points.to_vec(), center)?, devs))
}

/// Order-statistic quantile: the `ceil(p B)`-th smallest value.
pub(crate) fn upper_quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = ((p * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[k - 1]
}

/// Simultaneous band at level `1 - alpha` from a sup-norm percentile
/// bootstrap of the (undersmoothed) kernel estimate.
///
/// `bandwidth` is the cross-validated bandwidth; the band estimate uses
/// `options.undersmoothing * bandwidth`. With `boundary` set the reflection
/// estimator on `[boundary, ∞)` is used.
pub fn bootstrap_band(
    sample: &Sample,
    points: &[f64],
    bandwidth: f64,
    boundary: Option<f64>,
    options: &BandOptions,
) -> Result<ConfidenceBand> {
    options.validate()?;
    let h = options.undersmoothing * bandwidth;
    let (estimate, devs) =
        bootstrap_deviations(sample, points, h, boundary, options.replicates, options.seed)?;
    let q = upper_quantile(&devs, 1.0 - options.alpha);
    ConfidenceBand::around(estimate, q, 1.0 - options.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::linspace;

    fn small_sample() -> Sample {
        Sample::new((0..200).map(|i| ((i * 37 % 200) as f64 / 40.0 - 2.5).powi(3) / 4.0).collect())
            .unwrap()
    }

    #[test]
    fn band_contains_estimate() {
        let s = small_sample();
        let pts = linspace(-6.0, 6.0, 241);
        let band = bootstrap_band(&s, &pts, 0.4, None, &BandOptions::default()).unwrap();
        for i in 0..pts.len() {
            let (l, e, u) = (band.lower.values()[i], band.estimate.values()[i], band.upper.values()[i]);
            assert!(l <= e && e <= u);
        }
        assert!((band.level - 0.95).abs() < 1e-15);
    }

    #[test]
    fn permutation_invariant() {
        let s = small_sample();
        let mut rev = s.values().to_vec();
        rev.reverse();
        let r = Sample::new(rev).unwrap();
        let pts = linspace(-6.0, 6.0, 121);
        let opts = BandOptions { seed: 11, ..Default::default() };
        let a = bootstrap_band(&s, &pts, 0.4, None, &opts).unwrap();
        let b = bootstrap_band(&r, &pts, 0.4, None, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constant_sample_has_zero_width() {
        let s = Sample::new(vec![1.0; 50]).unwrap();
        let pts = linspace(-2.0, 4.0, 61);
        let band = bootstrap_band(&s, &pts, 0.3, None, &BandOptions::default()).unwrap();
        // resamples reproduce the estimate up to summation order
        assert!(band.half_width < 1e-12);
    }

    #[test]
    fn smaller_alpha_is_wider() {
        let s = small_sample();
        let pts = linspace(-6.0, 6.0, 121);
        let wide = BandOptions { alpha: 0.01, ..Default::default() };
        let narrow = BandOptions { alpha: 0.10, ..Default::default() };
        let a = bootstrap_band(&s, &pts, 0.4, None, &wide).unwrap();
        let b = bootstrap_band(&s, &pts, 0.4, None, &narrow).unwrap();
        assert!(a.half_width >= b.half_width);
    }

    #[test]
    fn rejects_bad_options() {
        let s = small_sample();
        let pts = linspace(-6.0, 6.0, 21);
        let few = BandOptions { replicates: 99, ..Default::default() };
        assert!(bootstrap_band(&s, &pts, 0.4, None, &few).is_err());
        let bad = BandOptions { alpha: 1.0, ..Default::default() };
        assert!(bootstrap_band(&s, &pts, 0.4, None, &bad).is_err());
    }

    #[test]
    fn quantile_is_an_order_statistic() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(upper_quantile(&v, 0.95), 95.0);
        assert_eq!(upper_quantile(&v, 0.951), 96.0);
        assert_eq!(upper_quantile(&[3.0], 0.5), 3.0);
    }
}
