use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Guard used when dividing by a reference density in tails.
pub const EPS_DIV: f64 = 1e-12;

const SPACING_RTOL: f64 = 1e-9;

/// Nonnegative density values on an equispaced grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    points: Vec<f64>,
    values: Vec<f64>,
    spacing: f64,
}

/// `m` equispaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (m - 1) as f64;
    (0..m)
        .map(|i| if i + 1 == m { hi } else { lo + step * i as f64 })
        .collect()
}

/// `m` points symmetric about `center`, spanning `center ± half_width`.
///
/// Points are generated pairwise so that `t[i] + t[m-1-i] == 2 * center`
/// holds up to one rounding.
pub fn symmetric_points(center: f64, half_width: f64, m: usize) -> Vec<f64> {
    let mut pts = vec![center; m];
    if m < 2 {
        return pts;
    }
    let step = 2.0 * half_width / (m - 1) as f64;
    for i in 0..m / 2 {
        let off = half_width - step * i as f64;
        pts[i] = center - off;
        pts[m - 1 - i] = center + off;
    }
    pts
}

pub(crate) fn check_points(points: &[f64]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidGrid("need at least two points".into()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidGrid("non-finite grid point".into()));
    }
    let m = points.len();
    let spacing = (points[m - 1] - points[0]) / (m - 1) as f64;
    if spacing <= 0.0 {
        return Err(Error::InvalidGrid("points must be strictly increasing".into()));
    }
    let tol = SPACING_RTOL * spacing + 4.0 * f64::EPSILON * points[0].abs().max(points[m - 1].abs());
    for (i, w) in points.windows(2).enumerate() {
        let d = w[1] - w[0];
        if (d - spacing).abs() > tol {
            return Err(Error::InvalidGrid(format!(
                "points not equispaced at index {i}: step {d} vs {spacing}"
            )));
        }
    }
    Ok(spacing)
}

impl DensityGrid {
    pub fn new(points: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let spacing = check_points(&points)?;
        if values.len() != points.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} points",
                values.len(),
                points.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidGrid(format!("invalid density value {v}")));
        }
        Ok(Self {
            points,
            values,
            spacing,
        })
    }

    /// Evaluates `f` on `m` equispaced points of `[lo, hi]`.
    pub fn from_fn(lo: f64, hi: f64, m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidGrid(format!("empty range [{lo}, {hi}]")));
        }
        let points = linspace(lo, hi, m);
        let values = points.iter().map(|&t| f(t)).collect();
        Self::new(points, values)
    }

    /// Evaluates `f` on a grid symmetric about `center`.
    pub fn symmetric_from_fn(
        center: f64,
        half_width: f64,
        m: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let points = symmetric_points(center, half_width, m);
        let values = points.iter().map(|&t| f(t)).collect();
        Self::new(points, values)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Same points, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.points.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} points",
                values.len(),
                self.points.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidGrid(format!("invalid density value {v}")));
        }
        Ok(Self {
            points: self.points.clone(),
            values,
            spacing: self.spacing,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn integrate(&self) -> f64 {
        integrate(self)
    }

    /// True when `other` lives on the same points (up to rounding).
    pub fn same_points(&self, other: &DensityGrid) -> bool {
        self.len() == other.len()
            && self
                .points
                .iter()
                .zip(&other.points)
                .all(|(a, b)| (a - b).abs() <= 1e-9 * self.spacing)
    }

    /// True when `t[i] + t[m-1-i] = 2 * center` for every `i`.
    pub fn is_symmetric_about(&self, center: f64) -> bool {
        let m = self.len();
        let tol = 1e-9 * self.spacing;
        (0..m).all(|i| (self.points[i] + self.points[m - 1 - i] - 2.0 * center).abs() <= tol)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Trapezoid rule over the grid.
pub fn integrate(grid: &DensityGrid) -> f64 {
    let v = grid.values();
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = v.iter().sum();
    grid.spacing() * (inner - 0.5 * (v[0] + v[n - 1]))
}

/// Grid plug-in of `sup {t : f >= t g0}`: the smallest ratio `f/g0` over
/// points where `g0` is above [`EPS_DIV`], clamped to `[0, 1]`.
pub fn theta0_plugin(f: &DensityGrid, g0: &DensityGrid) -> Result<f64> {
    if !f.same_points(g0) {
        return Err(Error::InvalidGrid("f and g0 must share grid points".into()));
    }
    let mut best = f64::INFINITY;
    for (&fv, &gv) in f.values().iter().zip(g0.values()) {
        if gv > EPS_DIV {
            best = best.min(fv / gv);
        }
    }
    if best.is_infinite() {
        return Err(Error::ZeroDensity);
    }
    Ok(best.clamp(0.0, 1.0))
}
