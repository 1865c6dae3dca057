//! Largest non-increasing background component on `[a, ∞)`:
//! `h0(x) = essinf{f(y) : y <= x}`, a running minimum on the grid.

use rayon::prelude::*;

use crate::bands::ConfidenceBand;
use crate::decomposition::{BackgroundDecomposition, BackgroundInterval, Shape};
use crate::density::DensityGrid;
use crate::error::{Error, Result};

fn running_min(f: &DensityGrid) -> Result<DensityGrid> {
    let mut acc = f64::INFINITY;
    f.with_values(
        f.values()
            .iter()
            .map(|&v| {
                acc = acc.min(v);
                acc
            })
            .collect(),
    )
}

/// Monotone decomposition of `f`, whose grid starts at the support's lower end.
pub fn extract_monotone(f: &DensityGrid) -> Result<BackgroundDecomposition> {
    let h0 = running_min(f)?;
    BackgroundDecomposition::from_h0(h0, Shape::Monotone, None)
}

/// Running minima of both band curves.
pub fn monotone_interval(band: &ConfidenceBand) -> Result<BackgroundInterval> {
    let h_l = running_min(&band.lower)?;
    let h_u = running_min(&band.upper)?;
    Ok(BackgroundInterval {
        pi_l: h_l.integrate().min(1.0),
        pi_u: h_u.integrate().min(1.0),
        h_l,
        h_u,
    })
}

/// Tries each candidate support start, `grid_from(a)` giving the density
/// on a grid beginning at `a`, and keeps the largest `pi0`. Ties go to the
/// smallest start.
pub fn search_support_start<F>(
    candidates: &[f64],
    grid_from: F,
) -> Result<(f64, BackgroundDecomposition)>
where
    F: Fn(f64) -> Result<DensityGrid> + Sync,
{
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no support-start candidates".into()));
    }
    let mut fits: Vec<BackgroundDecomposition> = candidates
        .par_iter()
        .map(|&a| extract_monotone(&grid_from(a)?))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for i in 1..fits.len() {
        if fits[i].pi0 > fits[best].pi0
            || (fits[i].pi0 == fits[best].pi0 && candidates[i] < candidates[best])
        {
            best = i;
        }
    }
    let mut fit = fits.swap_remove(best);
    fit.center = None;
    Ok((candidates[best], fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::models;

    #[test]
    fn decreasing_density_is_all_background() {
        let f = DensityGrid::from_fn(0.0, 12.0, 2401, |t| (-t).exp()).unwrap();
        let d = extract_monotone(&f).unwrap();
        assert!((d.pi0 - 1.0).abs() < 1e-3);
        assert_eq!(d.h0, f);
    }

    #[test]
    fn flat_part_over_bump() {
        let spec = models::m1();
        let f = DensityGrid::from_fn(0.0, 12.0, 2401, |t| spec.pdf(t)).unwrap();
        let h = extract_monotone(&f).unwrap().h0;
        let v = h.values();
        assert!(v.windows(2).all(|w| w[0] >= w[1]));
        // the Gamma bump around 5 is cut flat
        let i4 = 800;
        let i6 = 1200;
        assert!(v[i4..i6].windows(2).filter(|w| w[0] == w[1]).count() > 300);
    }

    #[test]
    fn zero_at_start_means_zero() {
        let f = DensityGrid::from_fn(0.0, 5.0, 101, |t| t * (-t).exp()).unwrap();
        assert_eq!(extract_monotone(&f).unwrap().pi0, 0.0);
    }

    #[test]
    fn idempotent() {
        let spec = models::m1();
        let f = DensityGrid::from_fn(0.0, 12.0, 1201, |t| spec.pdf(t)).unwrap();
        let a = extract_monotone(&f).unwrap();
        let b = extract_monotone(&a.h0).unwrap();
        assert_eq!(a.h0, b.h0);
        assert_eq!(a.pi0, b.pi0);
    }

    #[test]
    fn start_search_prefers_true_start() {
        // Exp(1) shifted to start at 1; starting earlier sees f = 0
        let f = |a: f64| DensityGrid::from_fn(a, a + 15.0, 1501, |t| if t >= 1.0 { (1.0 - t).exp() } else { 0.0 });
        let (a, d) = search_support_start(&[0.0, 0.5, 1.0], f).unwrap();
        assert_eq!(a, 1.0);
        assert!(d.pi0 > 0.99);
    }
}
