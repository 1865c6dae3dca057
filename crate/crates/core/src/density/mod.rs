//! Densities on equispaced grids: exact mixtures, kernel estimates and the
//! quadrature shared by every extractor.

mod bandwidth;
mod grid;
mod kde;
mod mixture;

pub use bandwidth::{
    lscv_candidates, lscv_score, lscv_score_reflected, log_spaced, select_bandwidth_lscv,
    select_bandwidth_lscv_reflected, silverman_bandwidth, LSCV_CANDIDATES, LSCV_RANGE,
};
pub use grid::{integrate, linspace, symmetric_points, theta0_plugin, DensityGrid, EPS_DIV};
pub use kde::{
    gaussian_kde, reflect_about, reflected_kde, KernelWindows, Sample, KERNEL_CUTOFF,
};
pub use mixture::{eval_mixture, grid_from_mixture, models, Component, Family, MixtureSpec};


/// Default number of grid points.
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Grids extend this many bandwidths past the data.
pub const GRID_PAD_BANDWIDTHS: f64 = 5.0;
pub(crate) use kde::quantile_sorted;
