//! Integral of `exp` of a piecewise-linear function and its gradient.

use serde::{Deserialize, Serialize};

/// Below this gap `λ` and its derivative switch to a Taylor expansion.
const SERIES_GAP: f64 = 1e-4;

/// Quadrature used for the mass of `exp(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Exact integral of the exponentiated linear interpolant.
    #[default]
    Exact,
    /// Trapezoid rule applied to `exp(v)`.
    Riemann,
}

impl std::str::FromStr for Objective {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Objective::Exact),
            "riemann" => Ok(Objective::Riemann),
            other => Err(crate::Error::InvalidArgument(format!("unknown objective {other:?}"))),
        }
    }
}

/// Mean of `exp` over a unit segment running linearly from `x` to `y`:
/// `(e^x - e^y) / (x - y)`, or `e^x` when `x = y`.
pub fn lambda_segment(x: f64, y: f64) -> f64 {
    let r = 0.5 * (x - y);
    if r.abs() < SERIES_GAP {
        // e^{(x+y)/2} sinh(r)/r
        let r2 = r * r;
        (0.5 * (x + y)).exp() * (1.0 + r2 / 6.0 * (1.0 + r2 / 20.0))
    } else {
        let gap = (x - y).abs();
        x.max(y).exp() * -(-gap).exp_m1() / gap
    }
}

/// `∂λ/∂x = (e^x (x - y - 1) + e^y) / (x - y)^2`, `e^x / 2` at `x = y`.
pub fn lambda_dx(x: f64, y: f64) -> f64 {
    let e = x - y;
    if e.abs() < SERIES_GAP {
        // e^y (1/2 + e/3 + e^2/8 + e^3/30)
        y.exp() * (0.5 + e * (1.0 / 3.0 + e * (1.0 / 8.0 + e / 30.0)))
    } else if e > 0.0 {
        // factor out e^x to avoid overflow for large gaps
        x.exp() * (e + (-e).exp_m1()) / (e * e)
    } else {
        y.exp() * (e * e.exp() - e.exp_m1()) / (e * e)
    }
}

/// `δ Σ λ(v_j, v_{j+1})`.
pub fn objective_exact(v: &[f64], delta: f64) -> f64 {
    delta * v.windows(2).map(|w| lambda_segment(w[0], w[1])).sum::<f64>()
}

/// `δ (½ e^{v_0} + Σ e^{v_j} + ½ e^{v_last})`.
pub fn objective_riemann(v: &[f64], delta: f64) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let s: f64 = v.iter().map(|x| x.exp()).sum();
    delta * (s - 0.5 * (v[0].exp() + v[n - 1].exp()))
}

pub fn gradient_exact(v: &[f64], delta: f64) -> Vec<f64> {
    let mut g = vec![0.0; v.len()];
    for j in 0..v.len().saturating_sub(1) {
        g[j] += delta * lambda_dx(v[j], v[j + 1]);
        g[j + 1] += delta * lambda_dx(v[j + 1], v[j]);
    }
    g
}

pub fn gradient_riemann(v: &[f64], delta: f64) -> Vec<f64> {
    let n = v.len();
    let mut g: Vec<f64> = v.iter().map(|x| delta * x.exp()).collect();
    if n >= 2 {
        g[0] *= 0.5;
        g[n - 1] *= 0.5;
    }
    g
}

impl Objective {
    pub fn value(self, v: &[f64], delta: f64) -> f64 {
        match self {
            Objective::Exact => objective_exact(v, delta),
            Objective::Riemann => objective_riemann(v, delta),
        }
    }

    pub fn gradient(self, v: &[f64], delta: f64) -> Vec<f64> {
        match self {
            Objective::Exact => gradient_exact(v, delta),
            Objective::Riemann => gradient_riemann(v, delta),
        }
    }
}
