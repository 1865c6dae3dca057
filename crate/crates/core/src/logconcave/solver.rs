//! Successive linear programming for the (convex) maximization of `Λ`.
//!
//! `Λ` is convex, so its linearization at `v` under-estimates it:
//! `Λ(w) >= Λ(v) + ∇Λ(v)·(w - v)`. Maximizing the linearization over the
//! polytope therefore never decreases `Λ`, and a point where the
//! linearization cannot be improved is a first-order stationary point.

use serde::Serialize;

use super::lp::solve_lp;
use super::objective::Objective;
use super::LogConcaveProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub objective: Objective,
    /// Allowed constraint violation.
    pub tol: f64,
    /// Stop once a step gains less than this fraction of the objective.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            objective: Objective::Exact,
            tol: 1e-8,
            rel_tol: 1e-6,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    pub v_star: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Relative gap `∇Λ(v)·(w - v) / Λ(v)` with `w` the best vertex of the
    /// linearization at `v`; zero exactly at stationary points.
    pub kkt_residual: f64,
    pub feasibility_violation: f64,
    pub converged: bool,
}

/// Largest violation of `v <= u` and of the concavity rows.
pub fn feasibility_violation(v: &[f64], u: &[f64]) -> f64 {
    let bound = v.iter().zip(u).map(|(a, b)| a - b).fold(0.0, f64::max);
    let conc = v
        .windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .fold(0.0, f64::max);
    bound.max(conc)
}

/// Solves from `problem.v_init`.
pub fn solve(problem: &LogConcaveProblem, options: &SolveOptions) -> SolverReport {
    solve_from(problem, &problem.v_init, options)
}

/// Solves from an arbitrary start (not necessarily feasible).
pub fn solve_from(problem: &LogConcaveProblem, start: &[f64], options: &SolveOptions) -> SolverReport {
    let u = &problem.u;
    let delta = problem.delta;
    let obj = options.objective;
    let mut current: Option<(Vec<f64>, f64)> = None;
    if feasibility_violation(start, u) <= options.tol {
        current = Some((start.to_vec(), obj.value(start, delta)));
    }
    let mut point = start.to_vec();
    let mut kkt = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=options.max_iter {
        iterations = it;
        let grad = obj.gradient(&point, delta);
        let lp = solve_lp(&grad, u);
        let next: Vec<f64> = lp.v.iter().zip(u).map(|(a, b)| a.min(*b)).collect();
        let next_val = obj.value(&next, delta);
        let gain: f64 = grad.iter().zip(next.iter().zip(&point)).map(|(g, (a, b))| g * (a - b)).sum();
        if feasibility_violation(&next, u) > options.tol {
            // linear solve fell short; keep what we have
            break;
        }
        match &current {
            Some((_, val)) if next_val <= val * (1.0 + options.rel_tol) => {
                kkt = (gain / val.max(f64::MIN_POSITIVE)).max(0.0);
                // stationarity is only certified by an accurate linear solve
                converged = lp.converged;
                if next_val > *val {
                    current = Some((next, next_val));
                }
                break;
            }
            _ => {
                point = next.clone();
                current = Some((next, next_val));
            }
        }
    }
    match current {
        Some((v, val)) => SolverReport {
            feasibility_violation: feasibility_violation(&v, u),
            v_star: v,
            objective: val,
            iterations,
            kkt_residual: kkt,
            converged,
        },
        None => SolverReport {
            feasibility_violation: feasibility_violation(start, u),
            v_star: start.to_vec(),
            objective: obj.value(start, delta),
            iterations,
            kkt_residual: f64::INFINITY,
            converged: false,
        },
    }
}
