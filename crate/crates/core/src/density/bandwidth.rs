//! Bandwidth selection by least-squares cross-validation.
//!
//! For the Gaussian kernel both terms of
//! `LSCV(h) = ∫ f̂_h² − (2/n) Σ_i f̂_h^{(−i)}(x_i)` reduce to pairwise sums,
//! so no grid or quadrature is involved.

use std::f64::consts::SQRT_2;

use super::kde::{gauss, gauss_conv, quantile_sorted, Sample, KERNEL_CUTOFF};
use crate::error::{Error, Result};

pub const LSCV_CANDIDATES: usize = 40;
pub const LSCV_RANGE: (f64, f64) = (0.1, 4.0);

/// Silverman's rule of thumb, `0.9 min(sd, IQR/1.34) n^{-1/5}`.
pub fn silverman_bandwidth(sample: &Sample) -> Result<f64> {
    let sorted = sample.sorted();
    let sd = sample.sd();
    if sd == 0.0 || sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::DegenerateSample);
    }
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (sample.len() as f64).powf(-0.2))
}

/// `count` log-spaced values between `lo_factor` and `hi_factor` times `base`.
pub fn log_spaced(base: f64, lo_factor: f64, hi_factor: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![base * lo_factor];
    }
    let (a, b) = ((base * lo_factor).ln(), (base * hi_factor).ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Default LSCV search set: 40 log-spaced values over `[0.1, 4]` times
/// Silverman's bandwidth.
pub fn lscv_candidates(sample: &Sample) -> Result<Vec<f64>> {
    let base = silverman_bandwidth(sample)?;
    Ok(log_spaced(base, LSCV_RANGE.0, LSCV_RANGE.1, LSCV_CANDIDATES))
}

/// LSCV criterion of the plain Gaussian KDE.
pub fn lscv_score(sample: &Sample, h: f64) -> f64 {
    let x = sample.sorted();
    lscv_sorted(&x, h)
}

fn lscv_sorted(x: &[f64], h: f64) -> f64 {
    let n = x.len() as f64;
    let reach_conv = KERNEL_CUTOFF * SQRT_2 * h;
    let reach = KERNEL_CUTOFF * h;
    let mut conv = 0.0;
    let mut loo = 0.0;
    for i in 0..x.len() {
        for &xj in &x[i + 1..] {
            let d = xj - x[i];
            if d > reach_conv {
                break;
            }
            conv += gauss_conv(d / h);
            if d <= reach {
                loo += gauss(d / h);
            }
        }
    }
    let int_sq = (n * gauss_conv(0.0) + 2.0 * conv) / (n * n * h);
    int_sq - 2.0 * (2.0 * loo) / (n * (n - 1.0) * h)
}

/// LSCV criterion of the reflection estimator on `[boundary, ∞)`.
///
/// Leaving observation `i` out removes its mirror image as well.
pub fn lscv_score_reflected(sample: &Sample, boundary: f64, h: f64) -> Result<f64> {
    let y = shifted_sorted(sample, boundary)?;
    Ok(lscv_reflected_sorted(&y, h))
}

fn shifted_sorted(sample: &Sample, boundary: f64) -> Result<Vec<f64>> {
    if let Some(&v) = sample.values().iter().find(|&&v| v < boundary) {
        return Err(Error::BelowSupport {
            value: v,
            bound: boundary,
        });
    }
    Ok(sample.sorted().into_iter().map(|v| v - boundary).collect())
}

fn lscv_reflected_sorted(y: &[f64], h: f64) -> f64 {
    let n = y.len() as f64;
    let reach_conv = KERNEL_CUTOFF * SQRT_2 * h;
    let reach = KERNEL_CUTOFF * h;
    // differences y_j - y_i, i < j
    let mut conv_minus = 0.0;
    let mut loo_minus = 0.0;
    for i in 0..y.len() {
        for &yj in &y[i + 1..] {
            let d = yj - y[i];
            if d > reach_conv {
                break;
            }
            conv_minus += gauss_conv(d / h);
            if d <= reach {
                loo_minus += gauss(d / h);
            }
        }
    }
    // sums y_i + y_j, i <= j; y is sorted ascending and nonnegative
    let mut conv_plus_off = 0.0;
    let mut conv_plus_diag = 0.0;
    let mut loo_plus_off = 0.0;
    for i in 0..y.len() {
        if 2.0 * y[i] > reach_conv {
            break;
        }
        conv_plus_diag += gauss_conv(2.0 * y[i] / h);
        for &yj in &y[i + 1..] {
            let s = y[i] + yj;
            if s > reach_conv {
                break;
            }
            conv_plus_off += gauss_conv(s / h);
            if s <= reach {
                loo_plus_off += gauss(s / h);
            }
        }
    }
    let int_sq = (n * gauss_conv(0.0) + 2.0 * conv_minus + conv_plus_diag + 2.0 * conv_plus_off)
        / (n * n * h);
    let loo = 2.0 * (loo_minus + loo_plus_off);
    int_sq - 2.0 * loo / (n * (n - 1.0) * h)
}

fn check_candidates(sample: &Sample, candidates: &[f64]) -> Result<()> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no bandwidth candidates".into()));
    }
    if let Some(h) = candidates.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidArgument(format!("bandwidth candidate {h} is not positive")));
    }
    if sample.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "cross-validation needs at least 10 observations, got {}",
            sample.len()
        )));
    }
    if sample.min() == sample.max() {
        return Err(Error::DegenerateSample);
    }
    Ok(())
}

/// Picks the smallest score; exact ties go to the larger bandwidth.
fn argmin_prefer_larger(candidates: &[f64], scores: &[f64]) -> f64 {
    let mut best = 0;
    for i in 1..candidates.len() {
        let better = scores[i] < scores[best]
            || (scores[i] == scores[best] && candidates[i] > candidates[best]);
        if better {
            best = i;
        }
    }
    candidates[best]
}

/// Candidate minimizing the LSCV criterion of the plain Gaussian KDE.
pub fn select_bandwidth_lscv(sample: &Sample, candidates: &[f64]) -> Result<f64> {
    check_candidates(sample, candidates)?;
    let x = sample.sorted();
    let scores: Vec<f64> = candidates.iter().map(|&h| lscv_sorted(&x, h)).collect();
    Ok(argmin_prefer_larger(candidates, &scores))
}

/// Candidate minimizing the LSCV criterion of the reflection estimator.
pub fn select_bandwidth_lscv_reflected(
    sample: &Sample,
    boundary: f64,
    candidates: &[f64],
) -> Result<f64> {
    check_candidates(sample, candidates)?;
    let y = shifted_sorted(sample, boundary)?;
    let scores: Vec<f64> = candidates
        .iter()
        .map(|&h| lscv_reflected_sorted(&y, h))
        .collect();
    Ok(argmin_prefer_larger(candidates, &scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::grid::{integrate, linspace};
    use crate::density::kde::{gaussian_kde, reflected_kde};

    fn pseudo_sample(n: usize) -> Sample {
        // deterministic, irregular points
        let v = (0..n)
            .map(|i| {
                let u = ((i as f64 + 0.5) * 0.618_033_988_75).fract();
                (u * 6.0 - 3.0) * (1.0 + 0.3 * (i as f64).sin())
            })
            .collect();
        Sample::new(v).unwrap()
    }

    /// LSCV evaluated the slow way: ∫ f̂² by fine-grid quadrature and the
    /// leave-one-out sum by direct kernel evaluation.
    fn lscv_brute(x: &[f64], h: f64) -> f64 {
        let s = Sample::new(x.to_vec()).unwrap();
        let lo = s.min() - 12.0 * h;
        let hi = s.max() + 12.0 * h;
        let g = gaussian_kde(&s, h, &linspace(lo, hi, 40_001)).unwrap();
        let sq = g.map(|v| v * v).unwrap();
        let n = x.len() as f64;
        let mut loo = 0.0;
        for i in 0..x.len() {
            for j in 0..x.len() {
                if i != j {
                    loo += gauss((x[i] - x[j]) / h) / ((n - 1.0) * h);
                }
            }
        }
        integrate(&sq) - 2.0 * loo / n
    }

    fn lscv_reflected_brute(y: &[f64], h: f64) -> f64 {
        let s = Sample::new(y.to_vec()).unwrap();
        let g = reflected_kde(&s, 0.0, h, &linspace(0.0, s.max() + 12.0 * h, 40_001)).unwrap();
        let sq = g.map(|v| v * v).unwrap();
        let n = y.len() as f64;
        let mut loo = 0.0;
        for i in 0..y.len() {
            for j in 0..y.len() {
                if i != j {
                    loo += (gauss((y[i] - y[j]) / h) + gauss((y[i] + y[j]) / h)) / ((n - 1.0) * h);
                }
            }
        }
        integrate(&sq) - 2.0 * loo / n
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let s = pseudo_sample(60);
        for h in [0.05, 0.2, 0.7] {
            let fast = lscv_score(&s, h);
            let slow = lscv_brute(s.values(), h);
            assert!((fast - slow).abs() < 1e-7, "h={h}: {fast} vs {slow}");
        }
    }

    #[test]
    fn reflected_closed_form_matches_quadrature() {
        let s = pseudo_sample(50);
        let y: Vec<f64> = s.values().iter().map(|v| v.abs()).collect();
        let ys = Sample::new(y.clone()).unwrap();
        for h in [0.05, 0.3, 1.0] {
            let fast = lscv_score_reflected(&ys, 0.0, h).unwrap();
            let slow = lscv_reflected_brute(&y, h);
            assert!((fast - slow).abs() < 1e-7, "h={h}: {fast} vs {slow}");
        }
    }

    #[test]
    fn single_candidate_returned() {
        let s = pseudo_sample(30);
        assert_eq!(select_bandwidth_lscv(&s, &[0.37]).unwrap(), 0.37);
    }

    #[test]
    fn degenerate_and_small_samples_rejected() {
        let s = Sample::new(vec![1.0; 20]).unwrap();
        assert_eq!(select_bandwidth_lscv(&s, &[0.1, 0.2]), Err(Error::DegenerateSample));
        let s = Sample::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(select_bandwidth_lscv(&s, &[0.1, 0.2]).is_err());
        assert!(select_bandwidth_lscv(&pseudo_sample(20), &[]).is_err());
        assert!(select_bandwidth_lscv(&pseudo_sample(20), &[0.1, -0.2]).is_err());
    }

    #[test]
    fn ties_go_to_larger_bandwidth() {
        assert_eq!(argmin_prefer_larger(&[0.1, 0.3, 0.2], &[1.0, 0.5, 0.5]), 0.3);
        assert_eq!(argmin_prefer_larger(&[0.3, 0.1], &[0.5, 0.5]), 0.3);
    }

    #[test]
    fn scale_equivariance() {
        let s = pseudo_sample(200);
        let cands = lscv_candidates(&s).unwrap();
        let h = select_bandwidth_lscv(&s, &cands).unwrap();
        let c = 3.7;
        let scaled = Sample::new(s.values().iter().map(|v| c * v).collect()).unwrap();
        let scaled_cands: Vec<f64> = cands.iter().map(|h| c * h).collect();
        let hc = select_bandwidth_lscv(&scaled, &scaled_cands).unwrap();
        assert!((hc - c * h).abs() < 1e-12 * hc);
    }
}
