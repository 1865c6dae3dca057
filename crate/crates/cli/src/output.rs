use std::io::Write;

use serde::Serialize;
use shapemix::logconcave::SolverReport;
use shapemix::{DensityGrid, FitOptions, FitResult, ReplicationSummary, Shape, ShapeSpec};

use crate::Failure;

/// Bumped whenever a key is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct SolverSummary {
    iterations: usize,
    objective: f64,
    kkt_residual: f64,
    feasibility_violation: f64,
    converged: bool,
}

impl From<&SolverReport> for SolverSummary {
    fn from(r: &SolverReport) -> Self {
        Self {
            iterations: r.iterations,
            objective: r.objective,
            kkt_residual: r.kkt_residual,
            feasibility_violation: r.feasibility_violation,
            converged: r.converged,
        }
    }
}

#[derive(Serialize)]
pub struct FitDocument<'a> {
    schema_version: u32,
    shape: Shape,
    n: usize,
    center: Option<f64>,
    support_start: Option<f64>,
    pi0: f64,
    pi_l: Option<f64>,
    pi_u: Option<f64>,
    alpha: Option<f64>,
    bandwidth: f64,
    band_half_width: Option<f64>,
    grid: &'a [f64],
    f_hat: &'a [f64],
    h0: &'a [f64],
    g0: &'a [f64],
    h_l: Option<&'a [f64]>,
    h_u: Option<&'a [f64]>,
    solver: Option<SolverSummary>,
}

impl<'a> FitDocument<'a> {
    pub fn new(r: &'a FitResult, options: &FitOptions, n: usize) -> Self {
        let iv = r.interval.as_ref();
        Self {
            schema_version: SCHEMA_VERSION,
            shape: r.shape,
            n,
            center: r.center,
            support_start: r.support_start,
            pi0: r.pi0(),
            pi_l: iv.map(|i| i.pi_l),
            pi_u: iv.map(|i| i.pi_u),
            alpha: options.band.map(|b| b.alpha),
            bandwidth: r.bandwidth,
            band_half_width: r.band_half_width,
            grid: r.f_hat.points(),
            f_hat: r.f_hat.values(),
            h0: r.decomposition.h0.values(),
            g0: r.decomposition.g0.values(),
            h_l: iv.map(|i| i.h_l.values()),
            h_u: iv.map(|i| i.h_u.values()),
            solver: r.solver.as_ref().map(SolverSummary::from),
        }
    }
}

#[derive(Serialize)]
pub struct TruthDocument {
    schema_version: u32,
    pi0: f64,
    shape: Shape,
    center: Option<f64>,
    resolution: usize,
}

impl TruthDocument {
    pub fn new(pi0: f64, shape: &ShapeSpec, resolution: usize) -> Self {
        let center = match shape {
            ShapeSpec::Symmetric(shapemix::CenterChoice::Given(c)) => Some(*c),
            _ => None,
        };
        Self {
            schema_version: SCHEMA_VERSION,
            pi0,
            shape: shape.shape(),
            center,
            resolution,
        }
    }
}

#[derive(Serialize)]
pub struct SimDocument<'a> {
    schema_version: u32,
    #[serde(flatten)]
    summary: &'a ReplicationSummary,
}

impl<'a> SimDocument<'a> {
    pub fn new(summary: &'a ReplicationSummary) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            summary,
        }
    }
}

/// A closed pipe (`| head`) is not an error.
fn finish(r: std::io::Result<()>) -> Result<(), Failure> {
    match r {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Failure::input(format!("cannot write output: {e}")))
        }
        _ => Ok(()),
    }
}

pub fn print_json<T: Serialize>(doc: &T) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    finish(
        serde_json::to_writer_pretty(&mut out, doc)
            .map_err(std::io::Error::from)
            .and_then(|_| writeln!(out)),
    )
}

/// Columns `t, f_hat, h0, g0, h_l, h_u`; band columns are empty without a band.
pub fn print_curves_csv(r: &FitResult) -> Result<(), Failure> {
    finish(write_curves(r, std::io::stdout().lock()))
}

fn io_error(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

fn write_curves<W: Write>(r: &FitResult, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "f_hat", "h0", "g0", "h_l", "h_u"]).map_err(io_error)?;
    let iv = r.interval.as_ref();
    let cell = |g: Option<&DensityGrid>, i: usize| g.map_or(String::new(), |g| g.values()[i].to_string());
    for i in 0..r.f_hat.len() {
        w.write_record([
            r.f_hat.points()[i].to_string(),
            r.f_hat.values()[i].to_string(),
            r.decomposition.h0.values()[i].to_string(),
            r.decomposition.g0.values()[i].to_string(),
            cell(iv.map(|v| &v.h_l), i),
            cell(iv.map(|v| &v.h_u), i),
        ])
        .map_err(io_error)?;
    }
    w.flush()
}
