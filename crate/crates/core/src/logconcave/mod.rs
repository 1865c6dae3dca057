//! Largest log-concave background component.
//!
//! With `v` the log of the background on the grid, the problem is to
//! maximize the mass `Λ(v)` of `exp` of the linear interpolant of `v`
//! subject to `v` being concave and `v <= log f`. Points where `f` is
//! numerically zero are trimmed first; a log-concave function has interval
//! support, so each contiguous run of positive `f` is solved on its own and
//! the best run wins.

mod banded;
mod lp;
mod objective;
mod solver;

use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

pub use objective::{
    gradient_exact, gradient_riemann, lambda_dx, lambda_segment, objective_exact,
    objective_riemann, Objective,
};
pub use solver::{feasibility_violation, solve, solve_from, SolveOptions, SolverReport};

use crate::bands::ConfidenceBand;
use crate::decomposition::{BackgroundDecomposition, BackgroundInterval, Shape};
use crate::density::DensityGrid;
use crate::error::{Error, Result};

/// Grid points with `f` below this are outside the problem domain.
pub const POSITIVITY_FLOOR: f64 = 1e-12;
/// Default initialization offset.
pub const DEFAULT_D: f64 = 0.02;
/// Default grid spacing and size cap when choosing `k` automatically.
pub const TARGET_SPACING: f64 = 0.02;
pub const MAX_VARIABLES: usize = 1001;

/// Log drop that switches a start off outside its window.
const OFF_WINDOW_DROP: f64 = 30.0;
/// Per-step slope used to extend a warm start past its support.
const WARM_EXTENSION_DROP: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogConcaveProblem {
    pub points: Vec<f64>,
    pub delta: f64,
    /// `log f` at the grid points.
    pub u: Vec<f64>,
    pub v_init: Vec<f64>,
    pub d: f64,
}

impl LogConcaveProblem {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// `n - 2` concavity rows plus `n` bound rows.
    pub fn num_constraints(&self) -> usize {
        2 * self.len() - 2
    }

    /// `A v - b`, concavity rows first; nonnegative exactly when feasible.
    pub fn constraint_values(&self, v: &[f64]) -> Vec<f64> {
        let conc = v.windows(3).map(|w| -w[2] + 2.0 * w[1] - w[0]);
        let bound = v.iter().zip(&self.u).map(|(a, b)| b - a);
        conc.chain(bound).collect()
    }

    /// Writes `t,u,v` rows for external plotting.
    pub fn write_csv<W: Write>(&self, v: &[f64], mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,u,v_star")?;
        for ((t, u), v) in self.points.iter().zip(&self.u).zip(v) {
            writeln!(out, "{t},{u},{v}")?;
        }
        Ok(())
    }
}

/// `u = log f`, `v_init = u - d`. Every value of `f` must clear the
/// positivity floor; trim first with [`positive_runs`].
pub fn build_problem(f: &DensityGrid, d: f64) -> Result<LogConcaveProblem> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument(format!("initialization offset must be > 0, got {d}")));
    }
    if f.values().iter().all(|&v| v < POSITIVITY_FLOOR) {
        return Err(Error::ZeroDensity);
    }
    if let Some(i) = f.values().iter().position(|&v| v < POSITIVITY_FLOOR) {
        return Err(Error::InvalidArgument(format!(
            "density {} at t = {} is below the positivity floor",
            f.values()[i],
            f.points()[i]
        )));
    }
    let u: Vec<f64> = f.values().iter().map(|v| v.ln()).collect();
    Ok(LogConcaveProblem {
        points: f.points().to_vec(),
        delta: f.spacing(),
        v_init: u.iter().map(|x| x - d).collect(),
        u,
        d,
    })
}

/// Maximal index ranges of at least two points where `f` clears the floor.
pub fn positive_runs(f: &DensityGrid) -> Vec<Range<usize>> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &v) in f.values().iter().enumerate() {
        match (v >= POSITIVITY_FLOOR, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push(s..f.len());
    }
    runs.retain(|r| r.len() >= 2);
    runs
}

/// Odd grid size giving spacing near [`TARGET_SPACING`] over `[lo, hi]`,
/// capped at [`MAX_VARIABLES`].
pub fn default_grid_points(lo: f64, hi: f64) -> usize {
    let k = ((hi - lo) / (2.0 * TARGET_SPACING)).ceil().max(1.0) as usize;
    (2 * k + 1).min(MAX_VARIABLES)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogConcaveOptions {
    pub d: f64,
    pub solve: SolveOptions,
}

impl Default for LogConcaveOptions {
    fn default() -> Self {
        Self {
            d: DEFAULT_D,
            solve: SolveOptions::default(),
        }
    }
}

impl LogConcaveOptions {
    pub fn with_objective(objective: Objective) -> Self {
        let mut o = Self::default();
        o.solve.objective = objective;
        o
    }
}

/// Full result of a log-concave extraction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogConcaveFit {
    pub decomposition: BackgroundDecomposition,
    /// Solver output on the winning run; `None` if `f` has no positive run.
    pub report: Option<SolverReport>,
    pub problem: Option<LogConcaveProblem>,
    /// Grid indices of the winning run.
    pub run: Range<usize>,
}

/// Cumulative-mass window `[lo_q, hi_q]` of `f` on the problem grid.
fn mass_window(values: &[f64], lo_q: f64, hi_q: f64) -> Range<usize> {
    let total: f64 = values.iter().sum();
    let mut acc = 0.0;
    let mut lo = 0;
    let mut hi = values.len();
    for (i, v) in values.iter().enumerate() {
        let before = acc;
        acc += v;
        if before < lo_q * total && acc >= lo_q * total {
            lo = i;
        }
        if before < hi_q * total && acc >= hi_q * total {
            hi = i + 1;
            break;
        }
    }
    lo..hi.max(lo + 2).min(values.len())
}

fn level_window(values: &[f64], frac: f64) -> Range<usize> {
    let top = values.iter().copied().fold(0.0, f64::max);
    let first = values.iter().position(|&v| v >= frac * top).unwrap_or(0);
    let last = values.iter().rposition(|&v| v >= frac * top).unwrap_or(values.len() - 1);
    first..(last + 1).max(first + 2).min(values.len())
}

/// `v_init` switched off outside `window`.
fn windowed_start(problem: &LogConcaveProblem, window: Range<usize>) -> Vec<f64> {
    problem
        .v_init
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let dist = if i < window.start {
                window.start - i
            } else if i >= window.end {
                i + 1 - window.end
            } else {
                0
            };
            v - OFF_WINDOW_DROP * dist.min(1) as f64
        })
        .collect()
}

/// The default start and four truncated ones.
fn starts(problem: &LogConcaveProblem) -> Vec<Vec<f64>> {
    let f: Vec<f64> = problem.u.iter().map(|x| x.exp()).collect();
    vec![
        problem.v_init.clone(),
        windowed_start(problem, mass_window(&f, 0.05, 0.95)),
        windowed_start(problem, mass_window(&f, 0.25, 0.75)),
        windowed_start(problem, level_window(&f, 0.5)),
        windowed_start(problem, level_window(&f, 0.05)),
    ]
}

/// Concave extension of a warm start: `log h` on its support, then steep
/// linear drops outward so it stays concave and under `u`.
fn warm_start(problem: &LogConcaveProblem, h: &[f64]) -> Option<Vec<f64>> {
    let first = h.iter().position(|&v| v > 0.0)?;
    let last = h.iter().rposition(|&v| v > 0.0)?;
    if h[first..=last].iter().any(|&v| v <= 0.0) {
        return None;
    }
    let mut v: Vec<f64> = h.iter().map(|&x| if x > 0.0 { x.ln() } else { 0.0 }).collect();
    let left_slope = if last > first { v[first + 1] - v[first] } else { 0.0 };
    let right_slope = if last > first { v[last] - v[last - 1] } else { 0.0 };
    for i in (0..first).rev() {
        v[i] = v[i + 1] - left_slope.max(0.0) - WARM_EXTENSION_DROP;
    }
    for i in last + 1..v.len() {
        v[i] = v[i - 1] + right_slope.min(0.0) - WARM_EXTENSION_DROP;
    }
    let v: Vec<f64> = v.iter().zip(&problem.u).map(|(a, b)| a.min(*b)).collect();
    Some(v)
}

/// Multi-start solve; best objective wins, ties to the lower start index.
pub fn solve_multistart(
    problem: &LogConcaveProblem,
    options: &SolveOptions,
    extra: Option<Vec<f64>>,
) -> SolverReport {
    let mut all = starts(problem);
    all.extend(extra);
    let reports: Vec<SolverReport> = all
        .par_iter()
        .map(|s| solve_from(problem, s, options))
        .collect();
    let mut best = 0;
    for i in 1..reports.len() {
        let ok = reports[i].feasibility_violation <= options.tol;
        let best_ok = reports[best].feasibility_violation <= options.tol;
        if (ok && !best_ok) || (ok == best_ok && reports[i].objective > reports[best].objective) {
            best = i;
        }
    }
    reports.into_iter().nth(best).expect("at least one start")
}

fn sub_grid(f: &DensityGrid, run: &Range<usize>) -> Result<DensityGrid> {
    DensityGrid::new(f.points()[run.clone()].to_vec(), f.values()[run.clone()].to_vec())
}

/// Extracts the log-concave background of `f`.
pub fn extract_logconcave(f: &DensityGrid, options: &LogConcaveOptions) -> Result<BackgroundDecomposition> {
    Ok(fit_logconcave(f, options, None)?.decomposition)
}

/// Like [`extract_logconcave`] with the solver details. `warm`, values of a
/// sub-density on the same grid that is log-concave and lies under `f`,
/// is added as an extra start; the result is then at least as good.
pub fn fit_logconcave(
    f: &DensityGrid,
    options: &LogConcaveOptions,
    warm: Option<&DensityGrid>,
) -> Result<LogConcaveFit> {
    if let Some(w) = warm {
        if !w.same_points(f) {
            return Err(Error::InvalidGrid("warm start must share grid points".into()));
        }
    }
    let mut runs = positive_runs(f);
    let mass = |r: &Range<usize>| sub_grid(f, r).map(|g| g.integrate()).unwrap_or(0.0);
    runs.sort_by(|a, b| mass(b).total_cmp(&mass(a)).then(a.start.cmp(&b.start)));

    let mut best: Option<(Range<usize>, LogConcaveProblem, SolverReport)> = None;
    for run in runs {
        let best_val = best.as_ref().map_or(0.0, |b| b.2.objective);
        // exp of a chord never exceeds the chord of exp, so the run's
        // trapezoid mass bounds what it can offer
        if mass(&run) <= best_val {
            break;
        }
        let problem = build_problem(&sub_grid(f, &run)?, options.d)?;
        let extra = warm.and_then(|w| warm_start(&problem, &w.values()[run.clone()]));
        let report = solve_multistart(&problem, &options.solve, extra);
        if report.feasibility_violation > options.solve.tol {
            continue;
        }
        if report.objective > best_val {
            best = Some((run, problem, report));
        }
    }

    let Some((run, problem, report)) = best else {
        if positive_runs(f).is_empty() {
            let h0 = f.map(|_| 0.0)?;
            return Ok(LogConcaveFit {
                decomposition: BackgroundDecomposition::with_mass(h0, 0.0, Shape::LogConcave, None)?,
                report: None,
                problem: None,
                run: 0..0,
            });
        }
        return Err(Error::Solver("no feasible log-concave solution found".into()));
    };
    let mut h = vec![0.0; f.len()];
    for (i, v) in run.clone().zip(&report.v_star) {
        h[i] = v.exp().min(f.values()[i]);
    }
    let h0 = f.with_values(h)?;
    let decomposition = BackgroundDecomposition::with_mass(h0, report.objective, Shape::LogConcave, None)?;
    Ok(LogConcaveFit {
        decomposition,
        report: Some(report),
        problem: Some(problem),
        run,
    })
}

/// Interval for `pi0` from the band's lower and upper curves. The upper
/// problem is warm-started from the lower solution, which is feasible for
/// it, so `pi_l <= pi_u` holds.
pub fn logconcave_interval(band: &ConfidenceBand, options: &LogConcaveOptions) -> Result<BackgroundInterval> {
    let lower = fit_logconcave(&band.lower, options, None)?;
    let upper = fit_logconcave(&band.upper, options, Some(&lower.decomposition.h0))?;
    Ok(BackgroundInterval {
        pi_l: lower.decomposition.pi0.min(1.0),
        pi_u: upper.decomposition.pi0.min(1.0),
        h_l: lower.decomposition.h0,
        h_u: upper.decomposition.h0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::ConfidenceBand;

    fn normal_grid(mu: f64, sigma: f64, lo: f64, hi: f64, m: usize) -> DensityGrid {
        DensityGrid::from_fn(lo, hi, m, |x| {
            let z = (x - mu) / sigma;
            (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        })
        .unwrap()
    }

    #[test]
    fn problem_layout() {
        let f = normal_grid(0.0, 1.0, -4.0, 4.0, 21);
        let p = build_problem(&f, 0.02).unwrap();
        assert_eq!(p.len(), 21);
        // (2k - 1) concavity rows plus (2k + 1) bound rows for n = 2k + 1
        assert_eq!(p.num_constraints(), 19 + 21);
        assert!((p.delta - 0.4).abs() < 1e-12);
        let c = p.constraint_values(&p.v_init);
        assert!(c[19..].iter().all(|&b| (b - 0.02).abs() < 1e-12));
        assert!(p.u.iter().all(|u| u.is_finite()));
    }

    #[test]
    fn problem_rejects_bad_input() {
        let f = normal_grid(0.0, 1.0, -4.0, 4.0, 21);
        assert!(build_problem(&f, 0.0).is_err());
        assert!(build_problem(&f, f64::NAN).is_err());
        let zero = f.map(|_| 0.0).unwrap();
        assert!(matches!(build_problem(&zero, 0.02), Err(Error::ZeroDensity)));
        let mut v = f.values().to_vec();
        v[3] = 0.0;
        assert!(matches!(build_problem(&f.with_values(v).unwrap(), 0.02), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn runs_split_at_zeros() {
        let f = DensityGrid::from_fn(0.0, 10.0, 11, |x| if (3.0..=4.0).contains(&x) || x == 8.0 || x == 10.0 { 0.0 } else { 1.0 })
            .unwrap();
        assert_eq!(positive_runs(&f), vec![0..3, 5..8]);
    }

    #[test]
    fn grid_size_rule() {
        assert_eq!(default_grid_points(-1.0, 1.0), 101);
        assert_eq!(default_grid_points(-20.0, 20.0), MAX_VARIABLES);
        assert_eq!(default_grid_points(0.0, 0.0), 3);
    }

    #[test]
    fn gaussian_is_its_own_background() {
        let f = normal_grid(1.0, 2.0, -15.0, 17.0, 801);
        let fit = fit_logconcave(&f, &LogConcaveOptions::default(), None).unwrap();
        let report = fit.report.unwrap();
        assert!(report.converged);
        assert!(report.feasibility_violation <= 1e-8);
        assert!((fit.decomposition.pi0 - 1.0).abs() < 1e-3, "{}", fit.decomposition.pi0);
        for (h, f) in fit.decomposition.h0.values().iter().zip(f.values()) {
            assert!(*h <= f + 1e-12);
        }
    }

    #[test]
    fn solution_is_log_concave_and_improves_on_start() {
        let f = DensityGrid::from_fn(-6.0, 9.0, 601, |x| {
            0.8 * (-0.5 * x * x).exp() / 2.5066 + 0.2 * (-2.0 * (x - 3.0).powi(2)).exp() / 1.2533
        })
        .unwrap();
        let fit = fit_logconcave(&f, &LogConcaveOptions::default(), None).unwrap();
        let p = fit.problem.unwrap();
        let r = fit.report.unwrap();
        assert!(r.converged);
        assert!(p.constraint_values(&r.v_star).iter().all(|&c| c >= -1e-8));
        // the constant min(u) is feasible, so the optimum must beat it
        let flat = vec![p.u.iter().copied().fold(f64::INFINITY, f64::min); p.len()];
        assert!(r.objective >= objective_exact(&flat, p.delta));
        let pi0 = fit.decomposition.pi0;
        assert!(pi0 > 0.8 && pi0 < 1.0, "{pi0}");
    }

    #[test]
    fn larger_block_wins_between_disjoint_bumps() {
        let f = DensityGrid::from_fn(-3.0, 9.0, 601, |x| {
            let b = |c: f64, w: f64| (-0.5 * ((x - c) / 0.3).powi(2)).exp() / (0.3 * 2.5066) * w;
            b(0.0, 0.35) + b(6.0, 0.65)
        })
        .unwrap();
        let fit = extract_logconcave(&f, &LogConcaveOptions::default()).unwrap();
        assert!((fit.pi0 - 0.65).abs() < 0.01, "{}", fit.pi0);
        let h = fit.h0.values();
        let near_zero: f64 = f.points().iter().zip(h).filter(|(t, _)| **t < 2.0).map(|(_, h)| *h).sum();
        assert!(near_zero < 1e-6);
    }

    #[test]
    fn riemann_pi0_is_trapezoid_mass() {
        let f = normal_grid(0.0, 1.0, -6.0, 6.0, 201);
        let d = extract_logconcave(&f, &LogConcaveOptions::with_objective(Objective::Riemann)).unwrap();
        assert!((d.pi0 - d.h0.integrate()).abs() < 1e-9);
        assert!((d.g0.integrate() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_density_has_empty_background() {
        let f = normal_grid(0.0, 1.0, -6.0, 6.0, 51).map(|_| 0.0).unwrap();
        let fit = fit_logconcave(&f, &LogConcaveOptions::default(), None).unwrap();
        assert_eq!(fit.decomposition.pi0, 0.0);
        assert!(fit.report.is_none());
    }

    #[test]
    fn interval_is_ordered() {
        let f = DensityGrid::from_fn(-6.0, 9.0, 401, |x| {
            0.85 * (-0.5 * x * x).exp() / 2.5066 + 0.15 * (-0.5 * (x - 3.0).powi(2)).exp() / 2.5066
        })
        .unwrap();
        let band = ConfidenceBand::around(f.clone(), 0.01, 0.95).unwrap();
        let iv = logconcave_interval(&band, &LogConcaveOptions::default()).unwrap();
        let mid = extract_logconcave(&f, &LogConcaveOptions::default()).unwrap().pi0;
        assert!(iv.pi_l <= mid && mid <= iv.pi_u, "{} {} {}", iv.pi_l, mid, iv.pi_u);
        assert!(iv.h_l.values().iter().zip(band.lower.values()).all(|(h, l)| *h <= l + 1e-12));
    }

    #[test]
    fn csv_dump() {
        let f = normal_grid(0.0, 1.0, -1.0, 1.0, 3);
        let p = build_problem(&f, 0.02).unwrap();
        let mut out = Vec::new();
        p.write_csv(&p.v_init, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("t,u,v_star\n-1,"));
    }
}
