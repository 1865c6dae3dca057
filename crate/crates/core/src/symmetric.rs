//! Largest background component symmetric about a center:
//! `h0(x) = min{f(x), f(2c - x)}`.

use rayon::prelude::*;

use crate::bands::ConfidenceBand;
use crate::decomposition::{BackgroundDecomposition, BackgroundInterval, Shape};
use crate::density::{linspace, DensityGrid, MixtureSpec, Sample};
use crate::error::{Error, Result};

/// Number of default center candidates.
pub const DEFAULT_CENTER_CANDIDATES: usize = 101;

/// Values of `pi0` this close count as tied; grids rebuilt about different
/// centers differ in the last bits of their spacing.
const PI0_TIE: f64 = 1e-12;

fn symmetric_min(f: &DensityGrid, center: f64) -> Result<DensityGrid> {
    if !f.is_symmetric_about(center) {
        return Err(Error::AsymmetricGrid { center });
    }
    let v = f.values();
    let m = v.len();
    f.with_values((0..m).map(|i| v[i].min(v[m - 1 - i])).collect())
}

/// Symmetric decomposition of `f` about `center`. The grid must be
/// symmetric about `center` so that reflection maps points onto points.
pub fn extract_symmetric(f: &DensityGrid, center: f64) -> Result<BackgroundDecomposition> {
    let h0 = symmetric_min(f, center)?;
    BackgroundDecomposition::from_h0(h0, Shape::Symmetric, Some(center))
}

/// Evaluates every candidate on its own grid, built by `grid_about`
/// symmetric about that candidate, and keeps the one with the largest
/// `pi0`. Ties go to the smallest `|c|`, then the smallest `c`.
pub fn search_center<F>(candidates: &[f64], grid_about: F) -> Result<(f64, BackgroundDecomposition)>
where
    F: Fn(f64) -> Result<DensityGrid> + Sync,
{
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no center candidates".into()));
    }
    let mut fits: Vec<BackgroundDecomposition> = candidates
        .par_iter()
        .map(|&c| extract_symmetric(&grid_about(c)?, c))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for i in 1..candidates.len() {
        let (a, b) = (&fits[i], &fits[best]);
        let (ca, cb) = (candidates[i], candidates[best]);
        let tie = (a.pi0 - b.pi0).abs() <= PI0_TIE;
        let better = (!tie && a.pi0 > b.pi0)
            || (tie && (ca.abs() < cb.abs() || (ca.abs() == cb.abs() && ca < cb)));
        if better {
            best = i;
        }
    }
    let c = candidates[best];
    Ok((c, fits.swap_remove(best)))
}

/// Center search on an exact mixture density, each candidate getting an
/// `m`-point grid spanning `c ± half_width`.
pub fn search_center_exact(
    spec: &MixtureSpec,
    candidates: &[f64],
    half_width: f64,
    m: usize,
) -> Result<(f64, BackgroundDecomposition)> {
    search_center(candidates, |c| {
        DensityGrid::symmetric_from_fn(c, half_width, m, |t| spec.pdf(t))
    })
}

/// 101 equispaced centers between the 40th and 60th sample percentiles.
pub fn default_center_candidates(sample: &Sample) -> Vec<f64> {
    let lo = sample.quantile(0.4);
    let hi = sample.quantile(0.6);
    if lo == hi {
        return vec![lo];
    }
    linspace(lo, hi, DEFAULT_CENTER_CANDIDATES)
}

/// Interval for `pi0` from a band whose grid is symmetric about `center`.
pub fn symmetric_interval(band: &ConfidenceBand, center: f64) -> Result<BackgroundInterval> {
    let h_l = symmetric_min(&band.lower, center)?;
    let h_u = symmetric_min(&band.upper, center)?;
    Ok(BackgroundInterval {
        pi_l: h_l.integrate().min(1.0),
        pi_u: h_u.integrate().min(1.0),
        h_l,
        h_u,
    })
}
