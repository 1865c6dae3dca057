//! Sample to decomposition: bandwidth, kernel estimate on the extractor's
//! grid, extraction, and optionally a bootstrap band and interval for `pi0`.

use serde::{Deserialize, Serialize};

use crate::bands::{bootstrap_band, BandOptions};
use crate::decomposition::{BackgroundDecomposition, BackgroundInterval, Shape};
use crate::density::{
    gaussian_kde, linspace, lscv_candidates, reflected_kde, select_bandwidth_lscv,
    select_bandwidth_lscv_reflected, symmetric_points, DensityGrid, Sample, DEFAULT_GRID_POINTS,
    GRID_PAD_BANDWIDTHS,
};
use crate::error::{Error, Result};
use crate::logconcave::{default_grid_points, fit_logconcave, logconcave_interval, LogConcaveOptions, LogConcaveProblem, SolverReport};
use crate::monotone::{monotone_interval, search_support_start};
use crate::symmetric::{default_center_candidates, search_center, symmetric_interval};

/// How the symmetric extractor picks its center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterChoice {
    Given(f64),
    /// Search the listed candidates, or the default set when `None`.
    Search(Option<Vec<f64>>),
}

/// Where the monotone extractor's support starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartChoice {
    /// The sample's declared lower bound, else zero.
    Default,
    Given(f64),
    Search(Vec<f64>),
}

/// Shape constraint together with its location parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeSpec {
    Symmetric(CenterChoice),
    Monotone(StartChoice),
    LogConcave,
}

impl ShapeSpec {
    pub fn shape(&self) -> Shape {
        match self {
            ShapeSpec::Symmetric(_) => Shape::Symmetric,
            ShapeSpec::Monotone(_) => Shape::Monotone,
            ShapeSpec::LogConcave => Shape::LogConcave,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub shape: ShapeSpec,
    /// Kernel bandwidth; cross-validated when `None`.
    pub bandwidth: Option<f64>,
    /// Grid size; 2001, or about 0.02 spacing (at most 1001 points) for
    /// the log-concave extractor, when `None`.
    pub grid_points: Option<usize>,
    pub logconcave: LogConcaveOptions,
    /// Bootstrap settings; no band or interval when `None`.
    pub band: Option<BandOptions>,
}

impl FitOptions {
    pub fn new(shape: ShapeSpec) -> Self {
        Self {
            shape,
            bandwidth: None,
            grid_points: None,
            logconcave: LogConcaveOptions::default(),
            band: Some(BandOptions::default()),
        }
    }

    pub fn without_band(mut self) -> Self {
        self.band = None;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub shape: Shape,
    pub center: Option<f64>,
    pub support_start: Option<f64>,
    pub bandwidth: f64,
    /// Kernel estimate the extractor was applied to.
    pub f_hat: DensityGrid,
    pub decomposition: BackgroundDecomposition,
    pub interval: Option<BackgroundInterval>,
    /// Bootstrap half-width of the band, when one was computed.
    pub band_half_width: Option<f64>,
    /// Log-concave solver output and the problem it solved.
    pub solver: Option<SolverReport>,
    pub problem: Option<LogConcaveProblem>,
}

impl FitResult {
    pub fn pi0(&self) -> f64 {
        self.decomposition.pi0
    }
}

fn check_grid_points(m: usize) -> Result<usize> {
    if m < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 grid points, got {m}")));
    }
    Ok(m)
}

fn bandwidth_for(sample: &Sample, given: Option<f64>, boundary: Option<f64>) -> Result<f64> {
    match given {
        Some(h) if h > 0.0 && h.is_finite() => Ok(h),
        Some(h) => Err(Error::InvalidArgument(format!("bandwidth must be > 0, got {h}"))),
        None => {
            let cands = lscv_candidates(sample)?;
            match boundary {
                Some(b) => select_bandwidth_lscv_reflected(sample, b, &cands),
                None => select_bandwidth_lscv(sample, &cands),
            }
        }
    }
}

/// Runs the whole estimation path on `sample`.
pub fn fit(sample: &Sample, options: &FitOptions) -> Result<FitResult> {
    match &options.shape {
        ShapeSpec::Symmetric(choice) => fit_symmetric(sample, choice, options),
        ShapeSpec::Monotone(choice) => fit_monotone(sample, choice, options),
        ShapeSpec::LogConcave => fit_logconcave_sample(sample, options),
    }
}

fn fit_symmetric(sample: &Sample, choice: &CenterChoice, options: &FitOptions) -> Result<FitResult> {
    let h = bandwidth_for(sample, options.bandwidth, None)?;
    let m = check_grid_points(options.grid_points.unwrap_or(DEFAULT_GRID_POINTS))?;
    let candidates = match choice {
        CenterChoice::Given(c) => vec![*c],
        CenterChoice::Search(Some(c)) => c.clone(),
        CenterChoice::Search(None) => default_center_candidates(sample),
    };
    if let Some(c) = candidates.iter().find(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument(format!("center {c} is not finite")));
    }
    // one half-width for all candidates, wide enough for every one of them
    let lo = sample.min() - GRID_PAD_BANDWIDTHS * h;
    let hi = sample.max() + GRID_PAD_BANDWIDTHS * h;
    let half_width = candidates
        .iter()
        .map(|&c| (c - lo).max(hi - c))
        .fold(0.0, f64::max);
    let (center, decomposition) = search_center(&candidates, |c| {
        gaussian_kde(sample, h, &symmetric_points(c, half_width, m))
    })?;
    let f_hat = gaussian_kde(sample, h, &symmetric_points(center, half_width, m))?;
    let (interval, q) = match &options.band {
        Some(b) => {
            let band = bootstrap_band(sample, f_hat.points(), h, None, b)?;
            (Some(symmetric_interval(&band, center)?), Some(band.half_width))
        }
        None => (None, None),
    };
    Ok(FitResult {
        shape: Shape::Symmetric,
        center: Some(center),
        support_start: None,
        bandwidth: h,
        f_hat,
        decomposition,
        interval,
        band_half_width: q,
        solver: None,
        problem: None,
    })
}

fn fit_monotone(sample: &Sample, choice: &StartChoice, options: &FitOptions) -> Result<FitResult> {
    let m = check_grid_points(options.grid_points.unwrap_or(DEFAULT_GRID_POINTS))?;
    let candidates = match choice {
        StartChoice::Default => vec![sample.support_lower().unwrap_or(0.0)],
        StartChoice::Given(a) => vec![*a],
        StartChoice::Search(c) if c.is_empty() => {
            return Err(Error::InvalidArgument("no support-start candidates".into()))
        }
        StartChoice::Search(c) => c.clone(),
    };
    let lowest = candidates.iter().copied().fold(f64::INFINITY, f64::min);
    let min = sample.min();
    if min < lowest {
        return Err(Error::BelowSupport { value: min, bound: lowest });
    }
    let fits_at = |a: f64| -> Result<(f64, DensityGrid)> {
        let h = bandwidth_for(sample, options.bandwidth, Some(a))?;
        let hi = sample.max() + GRID_PAD_BANDWIDTHS * h;
        Ok((h, reflected_kde(sample, a, h, &linspace(a, hi, m))?))
    };
    let (start, decomposition) = search_support_start(&candidates, |a| fits_at(a).map(|x| x.1))?;
    let (h, f_hat) = fits_at(start)?;
    let (interval, q) = match &options.band {
        Some(b) => {
            let band = bootstrap_band(sample, f_hat.points(), h, Some(start), b)?;
            (Some(monotone_interval(&band)?), Some(band.half_width))
        }
        None => (None, None),
    };
    Ok(FitResult {
        shape: Shape::Monotone,
        center: None,
        support_start: Some(start),
        bandwidth: h,
        f_hat,
        decomposition,
        interval,
        band_half_width: q,
        solver: None,
        problem: None,
    })
}

fn fit_logconcave_sample(sample: &Sample, options: &FitOptions) -> Result<FitResult> {
    let h = bandwidth_for(sample, options.bandwidth, None)?;
    let lo = sample.min() - GRID_PAD_BANDWIDTHS * h;
    let hi = sample.max() + GRID_PAD_BANDWIDTHS * h;
    let m = check_grid_points(options.grid_points.unwrap_or_else(|| default_grid_points(lo, hi)))?;
    let f_hat = gaussian_kde(sample, h, &linspace(lo, hi, m))?;
    let fit = fit_logconcave(&f_hat, &options.logconcave, None)?;
    let (interval, q) = match &options.band {
        Some(b) => {
            let band = bootstrap_band(sample, f_hat.points(), h, None, b)?;
            (
                Some(logconcave_interval(&band, &options.logconcave)?),
                Some(band.half_width),
            )
        }
        None => (None, None),
    };
    Ok(FitResult {
        shape: Shape::LogConcave,
        center: None,
        support_start: None,
        bandwidth: h,
        f_hat,
        decomposition: fit.decomposition,
        interval,
        band_half_width: q,
        solver: fit.report,
        problem: fit.problem,
    })
}
