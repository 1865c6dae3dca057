use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::density::{integrate, DensityGrid};
use crate::error::{Error, Result};

/// Shape constraint imposed on the background component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Symmetric,
    Monotone,
    #[serde(rename = "logconcave")]
    LogConcave,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Symmetric => "symmetric",
            Shape::Monotone => "monotone",
            Shape::LogConcave => "logconcave",
        })
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "symmetric" => Ok(Shape::Symmetric),
            "monotone" => Ok(Shape::Monotone),
            "logconcave" | "log-concave" => Ok(Shape::LogConcave),
            other => Err(Error::InvalidArgument(format!("unknown shape {other:?}"))),
        }
    }
}

/// `f = pi0 * g0 + (1 - pi0) * u` with `h0 = pi0 * g0` the largest
/// sub-density under `f` obeying the shape constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundDecomposition {
    pub pi0: f64,
    pub h0: DensityGrid,
    pub g0: DensityGrid,
    pub center: Option<f64>,
    pub shape: Shape,
}

impl BackgroundDecomposition {
    /// Builds the decomposition from `h0`, with `pi0` its trapezoid mass.
    /// Quadrature error can push that mass past one (a steep density on a
    /// coarse grid); `h0` is then scaled down so that `pi0 = 1` is its mass.
    pub(crate) fn from_h0(h0: DensityGrid, shape: Shape, center: Option<f64>) -> Result<Self> {
        let mass = integrate(&h0);
        if mass > 1.0 {
            return Self::with_mass(h0.map(|v| v / mass)?, 1.0, shape, center);
        }
        Self::with_mass(h0, mass, shape, center)
    }

    /// `pi0` supplied by the caller; `g0` is always normalized by the
    /// trapezoid mass of `h0` so that it integrates to one on the grid.
    pub(crate) fn with_mass(
        h0: DensityGrid,
        pi0: f64,
        shape: Shape,
        center: Option<f64>,
    ) -> Result<Self> {
        let mass = integrate(&h0);
        let g0 = if pi0 > 0.0 && mass > 0.0 {
            h0.map(|v| v / mass)?
        } else {
            standard_normal_on(&h0)?
        };
        Ok(Self {
            pi0: pi0.clamp(0.0, 1.0),
            h0,
            g0,
            center,
            shape,
        })
    }

    /// `(1 - pi0) u = f - h0`, the part of `f` left over.
    pub fn remainder(&self, f: &DensityGrid) -> Result<DensityGrid> {
        if !f.same_points(&self.h0) {
            return Err(Error::InvalidGrid("f and h0 must share grid points".into()));
        }
        f.with_values(
            f.values()
                .iter()
                .zip(self.h0.values())
                .map(|(a, b)| (a - b).max(0.0))
                .collect(),
        )
    }
}

/// Standard normal density on the grid; used as `g0` when `pi0 = 0`.
pub(crate) fn standard_normal_on(grid: &DensityGrid) -> Result<DensityGrid> {
    grid.with_values(
        grid.points()
            .iter()
            .map(|&t| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt())
            .collect(),
    )
}

/// Confidence interval for `pi0` and the background curves computed from
/// the lower and upper band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundInterval {
    pub pi_l: f64,
    pub pi_u: f64,
    pub h_l: DensityGrid,
    pub h_u: DensityGrid,
}

impl BackgroundInterval {
    pub fn contains(&self, pi0: f64) -> bool {
        self.pi_l <= pi0 && pi0 <= self.pi_u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn excess_quadrature_mass_is_scaled_off() {
        // trapezoid rule on a coarse grid overestimates e^-x on [0, 20]
        let h0 = DensityGrid::from_fn(0.0, 20.0, 41, |x| (-x).exp()).unwrap();
        assert!(integrate(&h0) > 1.0);
        let d = BackgroundDecomposition::from_h0(h0, Shape::Monotone, None).unwrap();
        assert_eq!(d.pi0, 1.0);
        assert!((integrate(&d.h0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_mass_uses_standard_normal() {
        let h0 = DensityGrid::from_fn(-8.0, 8.0, 1601, |_| 0.0).unwrap();
        let d = BackgroundDecomposition::from_h0(h0, Shape::Symmetric, Some(0.0)).unwrap();
        assert_eq!(d.pi0, 0.0);
        assert!((integrate(&d.g0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn shape_parsing() {
        assert_eq!("logconcave".parse::<Shape>().unwrap(), Shape::LogConcave);
        assert_eq!("Monotone".parse::<Shape>().unwrap(), Shape::Monotone);
        assert!("convex".parse::<Shape>().is_err());
        assert_eq!(Shape::LogConcave.to_string(), "logconcave");
    }
}
