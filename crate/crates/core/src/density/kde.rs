use std::f64::consts::PI;

use super::grid::{check_points, DensityGrid};
use crate::error::{Error, Result};

/// Kernel evaluations beyond this many bandwidths are dropped; the Gaussian
/// kernel is below 1e-21 of its peak there.
pub const KERNEL_CUTOFF: f64 = 10.0;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// An i.i.d. sample, optionally known to live on `[support_lower, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    support_lower: Option<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite sample value {v}")));
        }
        Ok(Self {
            values,
            support_lower: None,
        })
    }

    pub fn with_support_lower(values: Vec<f64>, lower: f64) -> Result<Self> {
        let mut s = Self::new(values)?;
        s.set_support_lower(lower)?;
        Ok(s)
    }

    pub fn set_support_lower(&mut self, lower: f64) -> Result<()> {
        if let Some(&v) = self.values.iter().find(|&&v| v < lower) {
            return Err(Error::BelowSupport { value: v, bound: lower });
        }
        self.support_lower = Some(lower);
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_lower(&self) -> Option<f64> {
        self.support_lower
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Sample standard deviation (n - 1 denominator); zero for n = 1.
    pub fn sd(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        let ss: f64 = self.values.iter().map(|v| (v - m) * (v - m)).sum();
        (ss / (n - 1) as f64).sqrt()
    }

    /// Linearly interpolated quantile (type 7).
    pub fn quantile(&self, p: f64) -> f64 {
        quantile_sorted(&self.sorted(), p)
    }
}

pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[inline]
pub(crate) fn gauss(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("bandwidth must be > 0, got {h}")));
    }
    Ok(())
}

/// Sum of kernels at each (increasing) point over sorted `locs`, scaled.
fn kernel_sums(locs: &[f64], h: f64, points: &[f64], scale: f64) -> Vec<f64> {
    let reach = KERNEL_CUTOFF * h;
    let mut lo = 0;
    let mut hi = 0;
    points
        .iter()
        .map(|&t| {
            while lo < locs.len() && locs[lo] < t - reach {
                lo += 1;
            }
            if hi < lo {
                hi = lo;
            }
            while hi < locs.len() && locs[hi] <= t + reach {
                hi += 1;
            }
            let s: f64 = locs[lo..hi].iter().map(|&x| gauss((t - x) / h)).sum();
            scale * s
        })
        .collect()
}

/// Gaussian kernel density estimate evaluated on equispaced `points`.
pub fn gaussian_kde(sample: &Sample, bandwidth: f64, points: &[f64]) -> Result<DensityGrid> {
    check_bandwidth(bandwidth)?;
    check_points(points)?;
    let locs = sample.sorted();
    let scale = 1.0 / (locs.len() as f64 * bandwidth);
    let values = kernel_sums(&locs, bandwidth, points, scale);
    DensityGrid::new(points.to_vec(), values)
}

/// The sample together with its mirror image about `boundary`.
pub fn reflect_about(sample: &Sample, boundary: f64) -> Result<Sample> {
    if let Some(&v) = sample.values().iter().find(|&&v| v < boundary) {
        return Err(Error::BelowSupport {
            value: v,
            bound: boundary,
        });
    }
    let mut aug = sample.values().to_vec();
    aug.extend(sample.values().iter().map(|&x| 2.0 * boundary - x));
    Sample::new(aug)
}

/// Reflection estimator on `[boundary, ∞)`: twice the KDE of the sample
/// augmented with its mirror image, so mass on the half-line is one.
pub fn reflected_kde(
    sample: &Sample,
    boundary: f64,
    bandwidth: f64,
    points: &[f64],
) -> Result<DensityGrid> {
    check_bandwidth(bandwidth)?;
    let spacing = check_points(points)?;
    if points[0] < boundary - 1e-9 * spacing {
        return Err(Error::InvalidArgument(format!(
            "grid starts at {} below boundary {boundary}",
            points[0]
        )));
    }
    let aug = reflect_about(sample, boundary)?;
    let plain = gaussian_kde(&aug, bandwidth, points)?;
    plain.map(|v| 2.0 * v)
}

/// Kernel weights of every (grid point, data point) pair within the cutoff,
/// laid out so that a resample, given as multiplicities of the original
/// observations, can be evaluated without recomputing exponentials.
#[derive(Debug, Clone)]
pub struct KernelWindows {
    points: Vec<f64>,
    offsets: Vec<usize>,
    source: Vec<u32>,
    weight: Vec<f64>,
    scale: f64,
    n: usize,
}

impl KernelWindows {
    /// Windows for the plain estimator, or for the reflection estimator when
    /// `boundary` is set.
    pub fn new(
        sample: &Sample,
        bandwidth: f64,
        points: &[f64],
        boundary: Option<f64>,
    ) -> Result<Self> {
        check_bandwidth(bandwidth)?;
        check_points(points)?;
        let n = sample.len();
        let mut locs: Vec<(f64, u32)> = sample
            .values()
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, i as u32))
            .collect();
        if let Some(b) = boundary {
            if let Some(&v) = sample.values().iter().find(|&&v| v < b) {
                return Err(Error::BelowSupport { value: v, bound: b });
            }
            locs.extend(
                sample
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| (2.0 * b - x, i as u32)),
            );
        }
        locs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let reach = KERNEL_CUTOFF * bandwidth;
        let mut offsets = Vec::with_capacity(points.len() + 1);
        let mut source = Vec::new();
        let mut weight = Vec::new();
        offsets.push(0);
        let mut lo = 0;
        for &t in points {
            while lo < locs.len() && locs[lo].0 < t - reach {
                lo += 1;
            }
            let mut k = lo;
            while k < locs.len() && locs[k].0 <= t + reach {
                source.push(locs[k].1);
                weight.push(gauss((t - locs[k].0) / bandwidth));
                k += 1;
            }
            offsets.push(source.len());
        }
        Ok(Self {
            points: points.to_vec(),
            offsets,
            source,
            weight,
            scale: 1.0 / (n as f64 * bandwidth),
            n,
        })
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    /// Estimate for a resample where observation `i` appears `counts[i]` times.
    pub fn evaluate(&self, counts: &[u32]) -> Vec<f64> {
        debug_assert_eq!(counts.len(), self.n);
        (0..self.points.len())
            .map(|j| {
                let r = self.offsets[j]..self.offsets[j + 1];
                let s: f64 = self.source[r.clone()]
                    .iter()
                    .zip(&self.weight[r])
                    .map(|(&i, &w)| counts[i as usize] as f64 * w)
                    .sum();
                self.scale * s
            })
            .collect()
    }

    /// Estimate for the original sample (every count one).
    pub fn evaluate_full(&self) -> Vec<f64> {
        self.evaluate(&vec![1; self.n])
    }
}

/// Density of N(0, 2) at `z`, the self-convolution of the Gaussian kernel.
#[inline]
pub(crate) fn gauss_conv(z: f64) -> f64 {
    0.5 / PI.sqrt() * (-0.25 * z * z).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::grid::linspace;

    #[test]
    fn one_point_kde_is_the_kernel() {
        let s = Sample::new(vec![0.0]).unwrap();
        let g = gaussian_kde(&s, 1.0, &linspace(-1.0, 1.0, 3)).unwrap();
        assert!((g.values()[1] - 0.398942).abs() < 1e-6);
    }

    #[test]
    fn reflection_doubles_boundary_mass() {
        let s = Sample::new(vec![0.0]).unwrap();
        let g = reflected_kde(&s, 0.0, 1.0, &linspace(0.0, 1.0, 3)).unwrap();
        assert!((g.values()[0] - 0.797885).abs() < 1e-6);
    }

    #[test]
    fn reflected_rejects_values_below_boundary() {
        let s = Sample::new(vec![0.5, -0.1]).unwrap();
        let r = reflected_kde(&s, 0.0, 0.3, &linspace(0.0, 3.0, 31));
        assert!(matches!(r, Err(Error::BelowSupport { .. })));
        let s = Sample::new(vec![0.5]).unwrap();
        assert!(reflected_kde(&s, 0.0, 0.3, &linspace(-1.0, 3.0, 41)).is_err());
    }

    #[test]
    fn empty_sample_rejected() {
        assert_eq!(Sample::new(vec![]), Err(Error::EmptySample));
    }

    #[test]
    fn windows_match_direct_kde() {
        let s = Sample::new(vec![0.1, 0.4, 2.0, 2.2, 3.5, 0.05]).unwrap();
        let pts = linspace(0.0, 6.0, 121);
        let w = KernelWindows::new(&s, 0.3, &pts, None).unwrap();
        let direct = gaussian_kde(&s, 0.3, &pts).unwrap();
        for (a, b) in w.evaluate_full().iter().zip(direct.values()) {
            assert!((a - b).abs() < 1e-13);
        }
        let w = KernelWindows::new(&s, 0.3, &pts, Some(0.0)).unwrap();
        let direct = reflected_kde(&s, 0.0, 0.3, &pts).unwrap();
        for (a, b) in w.evaluate_full().iter().zip(direct.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn quantiles() {
        let s = Sample::new(vec![3.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(s.quantile(0.0), 1.0);
        assert_eq!(s.quantile(1.0), 4.0);
        assert!((s.quantile(0.5) - 2.5).abs() < 1e-15);
    }
}
