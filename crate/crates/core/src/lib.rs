//! Maximal shape-constrained background components of one-dimensional
//! densities.
//!
//! A density `f` is split as `f = pi0 * g0 + (1 - pi0) * u` where `g0` is
//! symmetric, monotone or log-concave and `pi0` is as large as possible.
//! Extractors work on exact densities or kernel estimates laid out on an
//! equispaced [`DensityGrid`]; bootstrap bands turn into intervals for `pi0`.

pub mod bands;
pub mod decomposition;
pub mod density;
pub mod error;
pub mod logconcave;
pub mod monotone;
pub mod pipeline;
pub mod simulate;
pub mod symmetric;

pub use bands::{bootstrap_band, BandOptions, ConfidenceBand};
pub use decomposition::{BackgroundDecomposition, BackgroundInterval, Shape};
pub use density::{
    eval_mixture, gaussian_kde, grid_from_mixture, integrate, reflected_kde, select_bandwidth_lscv,
    theta0_plugin, DensityGrid, MixtureSpec, Sample,
};
pub use error::{Error, Result};
pub use logconcave::{extract_logconcave, logconcave_interval, LogConcaveOptions, Objective};
pub use monotone::{extract_monotone, monotone_interval};
pub use pipeline::{fit, CenterChoice, FitOptions, FitResult, ShapeSpec, StartChoice};
pub use simulate::{run_replications, sample_mixture, true_pi0, ReplicationConfig, ReplicationSummary};
pub use symmetric::{extract_symmetric, search_center, symmetric_interval};
