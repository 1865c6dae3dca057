//! Ground truth on exact mixtures and seeded Monte-Carlo replications.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, Normal, StudentT, Uniform};
use rayon::prelude::*;
use serde::Serialize;

use crate::bands::BandOptions;
use crate::density::{linspace, quantile_sorted, Family, MixtureSpec, Sample};
use crate::error::{Error, Result};
use crate::logconcave::{fit_logconcave, LogConcaveOptions};
use crate::monotone::{extract_monotone, search_support_start};
use crate::pipeline::{fit, CenterChoice, FitOptions, ShapeSpec, StartChoice};
use crate::symmetric::{extract_symmetric, search_center_exact};

/// Default resolution for symmetric and monotone truths.
pub const TRUTH_POINTS: usize = 4001;
/// Default resolution for log-concave truths.
pub const TRUTH_POINTS_LOGCONCAVE: usize = 1001;

fn draw_family<R: Rng + ?Sized>(family: &Family, rng: &mut R) -> f64 {
    match *family {
        Family::Normal { mu, sigma } => Normal::new(mu, sigma).expect("validated").sample(rng),
        Family::Gamma { shape, scale } => Gamma::new(shape, scale).expect("validated").sample(rng),
        Family::Exponential { scale } => Exp::new(1.0 / scale).expect("validated").sample(rng),
        Family::StudentT { df } => StudentT::new(df).expect("validated").sample(rng),
        Family::Uniform { a, b } => Uniform::new(a, b).expect("validated").sample(rng),
    }
}

/// `n` draws from `spec`: a component by weight, then its sampler.
pub fn sample_mixture(spec: &MixtureSpec, n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let comps = spec.components();
    let values = (0..n)
        .map(|_| {
            let mut u: f64 = rng.random();
            let mut pick = comps.len() - 1;
            for (i, c) in comps.iter().enumerate() {
                if u < c.weight {
                    pick = i;
                    break;
                }
                u -= c.weight;
            }
            draw_family(&comps[pick].family, &mut rng)
        })
        .collect();
    let mut sample = Sample::new(values)?;
    if let Some(a) = spec.support_lower() {
        sample.set_support_lower(a)?;
    }
    Ok(sample)
}

/// Seed of replicate `index`: the first word of the ChaCha stream `index`
/// under the master key.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Range carrying all but a negligible part of a component's mass.
fn family_range(family: &Family) -> (f64, f64) {
    match *family {
        Family::Normal { mu, sigma } => (mu - 9.0 * sigma, mu + 9.0 * sigma),
        Family::Gamma { shape, scale } => {
            let sd = shape.sqrt() * scale;
            (0.0, shape * scale + 15.0 * sd + 30.0 * scale)
        }
        Family::Exponential { scale } => (0.0, 35.0 * scale),
        Family::StudentT { df } => {
            let r = if df <= 10.0 { 20.0 } else { 12.0 };
            (-r, r)
        }
        Family::Uniform { a, b } => {
            let pad = 0.5 * (b - a);
            (a - pad, b + pad)
        }
    }
}

/// Union of the component ranges.
pub fn mixture_range(spec: &MixtureSpec) -> (f64, f64) {
    spec.components()
        .iter()
        .map(|c| family_range(&c.family))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
            (lo.min(a), hi.max(b))
        })
}

/// Candidate centers used by the exact-density truth when none are given:
/// 0.01 steps over `[-0.5, 0.5]`.
pub fn truth_center_candidates() -> Vec<f64> {
    (-50..=50).map(|i| i as f64 / 100.0).collect()
}

/// `pi0` of the exact mixture under `shape`, on a grid of `resolution`
/// points over [`mixture_range`].
pub fn true_pi0(spec: &MixtureSpec, shape: &ShapeSpec, resolution: usize) -> Result<f64> {
    if resolution < 3 {
        return Err(Error::InvalidArgument("resolution must be at least 3".into()));
    }
    let (lo, hi) = mixture_range(spec);
    match shape {
        ShapeSpec::Symmetric(choice) => {
            let cands = match choice {
                CenterChoice::Given(c) => vec![*c],
                CenterChoice::Search(Some(c)) => c.clone(),
                CenterChoice::Search(None) => truth_center_candidates(),
            };
            let hw = cands
                .iter()
                .map(|&c| (c - lo).max(hi - c))
                .fold(0.0, f64::max);
            if cands.len() == 1 {
                let c = cands[0];
                let f = crate::density::DensityGrid::symmetric_from_fn(c, hw, resolution, |t| spec.pdf(t))?;
                return Ok(extract_symmetric(&f, c)?.pi0);
            }
            Ok(search_center_exact(spec, &cands, hw, resolution)?.1.pi0)
        }
        ShapeSpec::Monotone(choice) => {
            let Some(a0) = spec.support_lower() else {
                return Err(Error::InvalidMixture(
                    "monotone truth needs a support bounded below".into(),
                ));
            };
            let cands = match choice {
                StartChoice::Default => vec![a0],
                StartChoice::Given(a) => vec![*a],
                StartChoice::Search(c) => c.clone(),
            };
            let grid = |a: f64| {
                crate::density::DensityGrid::new(
                    linspace(a, hi, resolution),
                    linspace(a, hi, resolution).iter().map(|&t| spec.pdf(t)).collect(),
                )
            };
            if cands.len() == 1 {
                return Ok(extract_monotone(&grid(cands[0])?)?.pi0);
            }
            Ok(search_support_start(&cands, grid)?.1.pi0)
        }
        ShapeSpec::LogConcave => {
            let f = crate::density::DensityGrid::from_fn(lo, hi, resolution, |t| spec.pdf(t))?;
            Ok(fit_logconcave(&f, &LogConcaveOptions::default(), None)?.decomposition.pi0)
        }
    }
}

/// Default truth resolution for a shape.
pub fn default_resolution(shape: &ShapeSpec) -> usize {
    match shape {
        ShapeSpec::LogConcave => TRUTH_POINTS_LOGCONCAVE,
        _ => TRUTH_POINTS,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationConfig {
    pub spec: MixtureSpec,
    pub shape: ShapeSpec,
    pub n: usize,
    pub reps: usize,
    pub alpha: f64,
    pub bootstrap: usize,
    pub seed: u64,
    /// Compute bands and intervals (the expensive part).
    pub intervals: bool,
    pub bandwidth: Option<f64>,
    pub logconcave: LogConcaveOptions,
    /// Oracle value; computed with [`true_pi0`] when `None`.
    pub truth: Option<f64>,
}

impl ReplicationConfig {
    pub fn new(spec: MixtureSpec, shape: ShapeSpec, n: usize, reps: usize, seed: u64) -> Self {
        Self {
            spec,
            shape,
            n,
            reps,
            alpha: 0.05,
            bootstrap: 500,
            seed,
            intervals: true,
            bandwidth: None,
            logconcave: LogConcaveOptions::default(),
            truth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationSummary {
    pub estimator: String,
    pub truth: f64,
    pub n: usize,
    pub reps: usize,
    pub failures: usize,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub mean_abs_error: f64,
    pub coverage_count: Option<usize>,
    pub median_pi_l: Option<f64>,
    pub median_pi_u: Option<f64>,
    /// Per-replicate estimates in replicate order (failures omitted).
    pub estimates: Vec<f64>,
}

struct Stats {
    mean: f64,
    median: f64,
    sd: f64,
}

fn stats(values: &[f64]) -> Stats {
    if values.is_empty() {
        return Stats { mean: f64::NAN, median: f64::NAN, sd: f64::NAN };
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() < 2 {
        0.0
    } else {
        (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Stats { mean, median: quantile_sorted(&v, 0.5), sd }
}

/// Short label such as `symmetric(center=0)`.
pub fn estimator_name(shape: &ShapeSpec) -> String {
    match shape {
        ShapeSpec::Symmetric(CenterChoice::Given(c)) => format!("symmetric(center={c})"),
        ShapeSpec::Symmetric(CenterChoice::Search(_)) => "symmetric(searched center)".into(),
        ShapeSpec::Monotone(StartChoice::Default) => "monotone".into(),
        ShapeSpec::Monotone(StartChoice::Given(a)) => format!("monotone(start={a})"),
        ShapeSpec::Monotone(StartChoice::Search(_)) => "monotone(searched start)".into(),
        ShapeSpec::LogConcave => "logconcave".into(),
    }
}

/// Replicates sample, fit and interval `reps` times. Failed replicates are
/// counted, not fatal.
pub fn run_replications(config: &ReplicationConfig) -> Result<ReplicationSummary> {
    if config.reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    let truth = match config.truth {
        Some(t) => t,
        None => true_pi0(&config.spec, &config.shape, default_resolution(&config.shape))?,
    };
    let options = FitOptions {
        shape: config.shape.clone(),
        bandwidth: config.bandwidth,
        grid_points: None,
        logconcave: config.logconcave,
        band: None,
    };
    let outcomes: Vec<Option<(f64, Option<(f64, f64)>)>> = (0..config.reps)
        .into_par_iter()
        .map(|r| {
            let seed = replicate_seed(config.seed, r as u64);
            let sample = sample_mixture(&config.spec, config.n, seed).ok()?;
            let mut opts = options.clone();
            if config.intervals {
                opts.band = Some(BandOptions {
                    alpha: config.alpha,
                    replicates: config.bootstrap,
                    seed: seed ^ 0x5eed_0f_b007,
                    ..BandOptions::default()
                });
            }
            let res = fit(&sample, &opts).ok()?;
            Some((res.pi0(), res.interval.map(|iv| (iv.pi_l, iv.pi_u))))
        })
        .collect();

    let ok: Vec<(f64, Option<(f64, f64)>)> = outcomes.iter().flatten().copied().collect();
    let estimates: Vec<f64> = ok.iter().map(|o| o.0).collect();
    let s = stats(&estimates);
    let mae = stats(&estimates.iter().map(|e| (e - truth).abs()).collect::<Vec<_>>()).mean;
    let (coverage, med_l, med_u) = if config.intervals {
        let iv: Vec<(f64, f64)> = ok.iter().filter_map(|o| o.1).collect();
        let cov = iv.iter().filter(|(l, u)| *l <= truth && truth <= *u).count();
        let l: Vec<f64> = iv.iter().map(|x| x.0).collect();
        let u: Vec<f64> = iv.iter().map(|x| x.1).collect();
        (Some(cov), Some(stats(&l).median), Some(stats(&u).median))
    } else {
        (None, None, None)
    };
    Ok(ReplicationSummary {
        estimator: estimator_name(&config.shape),
        truth,
        n: config.n,
        reps: config.reps,
        failures: config.reps - ok.len(),
        mean: s.mean,
        median: s.median,
        sd: s.sd,
        mean_abs_error: mae,
        coverage_count: coverage,
        median_pi_l: med_l,
        median_pi_u: med_u,
        estimates,
    })
}

impl fmt::Display for ReplicationSummary {
    /// Aligned two-column table.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        let rows = [
            ("estimator", self.estimator.clone()),
            ("truth", format!("{:.4}", self.truth)),
            ("n", self.n.to_string()),
            ("reps", self.reps.to_string()),
            ("failures", self.failures.to_string()),
            ("mean", format!("{:.4}", self.mean)),
            ("median", format!("{:.4}", self.median)),
            ("sd", format!("{:.4}", self.sd)),
            ("mean |error|", format!("{:.4}", self.mean_abs_error)),
            ("coverage", self.coverage_count.map_or("-".into(), |c| format!("{c}/{}", self.reps))),
            ("median pi_l", opt(self.median_pi_l)),
            ("median pi_u", opt(self.median_pi_u)),
        ];
        let w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        for (k, v) in rows {
            writeln!(f, "{k:<w$}  {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::models;

    #[test]
    fn same_seed_same_sample() {
        let a = sample_mixture(&models::s1(), 50, 3).unwrap();
        let b = sample_mixture(&models::s1(), 50, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_mixture(&models::s1(), 50, 4).unwrap());
    }

    #[test]
    fn positive_support_is_declared() {
        let s = sample_mixture(&models::m1(), 100, 1).unwrap();
        assert_eq!(s.support_lower(), Some(0.0));
        assert!(s.min() >= 0.0);
    }

    #[test]
    fn replicate_seeds_differ() {
        let a: Vec<u64> = (0..5).map(|i| replicate_seed(9, i)).collect();
        let mut b = a.clone();
        b.dedup();
        assert_eq!(a, b);
        assert_eq!(replicate_seed(9, 2), a[2]);
    }

    #[test]
    fn stats_single_value() {
        let s = stats(&[0.4]);
        assert_eq!(s.sd, 0.0);
        assert_eq!(s.mean, 0.4);
        assert_eq!(s.median, 0.4);
    }

    #[test]
    fn monotone_truth_needs_bounded_support() {
        let r = true_pi0(&models::s1(), &ShapeSpec::Monotone(StartChoice::Default), 101);
        assert!(matches!(r, Err(Error::InvalidMixture(_))));
    }
}
