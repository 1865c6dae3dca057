//! `shapemix`: extract shape-constrained background components from data
//! or exact mixtures, and run seeded simulation studies.

mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shapemix::bands::BandOptions;
use shapemix::logconcave::{LogConcaveOptions, Objective};
use shapemix::simulate::{default_resolution, run_replications, true_pi0, ReplicationConfig};
use shapemix::{fit, CenterChoice, Error, FitOptions, Sample, ShapeSpec, StartChoice};

/// Exit code for unreadable or invalid input.
const EXIT_INPUT: u8 = 2;
/// Exit code for numerical or solver failure.
const EXIT_NUMERIC: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Solver(_) | Error::ZeroDensity => EXIT_NUMERIC,
            _ => EXIT_INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "shapemix", version, about = "Maximal shape-constrained background components")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the background component of a sample read from CSV.
    Fit(FitArgs),
    /// Background proportion of an exact mixture density.
    TruePi0(TruthArgs),
    /// Monte-Carlo replications of the estimator on a mixture model.
    Simulate(SimArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Symmetric,
    Monotone,
    Logconcave,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Exact,
    Riemann,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FitFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimFormat {
    Json,
    Text,
}

#[derive(Args, Clone)]
struct ShapeOpts {
    #[arg(long, value_enum)]
    shape: ShapeArg,
    /// Symmetry center.
    #[arg(long, conflicts_with = "center_search")]
    center: Option<f64>,
    /// Search the symmetry center (default when --center is absent).
    #[arg(long)]
    center_search: bool,
    /// Explicit center candidates for the search, comma separated.
    #[arg(long, value_delimiter = ',', requires = "center_search")]
    center_candidates: Option<Vec<f64>>,
    /// Lower end of the support for the monotone shape.
    #[arg(long, conflicts_with = "support_search")]
    support_start: Option<f64>,
    /// Candidate support starts to search, comma separated.
    #[arg(long, value_delimiter = ',')]
    support_search: Option<Vec<f64>>,
}

impl ShapeOpts {
    fn spec(&self) -> ShapeSpec {
        match self.shape {
            ShapeArg::Symmetric => ShapeSpec::Symmetric(match self.center {
                Some(c) => CenterChoice::Given(c),
                None => CenterChoice::Search(self.center_candidates.clone()),
            }),
            ShapeArg::Monotone => ShapeSpec::Monotone(match (&self.support_start, &self.support_search) {
                (Some(a), _) => StartChoice::Given(*a),
                (None, Some(c)) => StartChoice::Search(c.clone()),
                (None, None) => StartChoice::Default,
            }),
            ShapeArg::Logconcave => ShapeSpec::LogConcave,
        }
    }
}

#[derive(Args, Clone)]
struct SolverOpts {
    /// Initialization offset of the log-concave solver.
    #[arg(long, default_value_t = 0.02)]
    d: f64,
    #[arg(long, value_enum, default_value = "exact")]
    objective: ObjectiveArg,
}

impl SolverOpts {
    fn options(&self) -> LogConcaveOptions {
        let mut o = LogConcaveOptions::with_objective(match self.objective {
            ObjectiveArg::Exact => Objective::Exact,
            ObjectiveArg::Riemann => Objective::Riemann,
        });
        o.d = self.d;
        o
    }
}

#[derive(Args)]
struct FitArgs {
    /// CSV file; the first column holds the sample.
    data: PathBuf,
    #[command(flatten)]
    shape: ShapeOpts,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap replicates for the confidence band.
    #[arg(long, default_value_t = 500)]
    bootstrap: usize,
    /// Skip the bootstrap band and interval.
    #[arg(long)]
    no_band: bool,
    /// Kernel bandwidth (default: least-squares cross-validation).
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Grid size (default 2001; log-concave: spacing near 0.02, at most 1001).
    #[arg(long)]
    grid_points: Option<usize>,
    #[command(flatten)]
    solver: SolverOpts,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    output: FitFormat,
    /// Also write the log-concave problem (t, u, v_star) to this CSV file.
    #[arg(long)]
    dump_problem: Option<PathBuf>,
}

#[derive(Args)]
struct TruthArgs {
    /// Mixture JSON file or built-in model name (s1..s5, m1, m2, l1..l5).
    #[arg(long)]
    model: String,
    #[command(flatten)]
    shape: ShapeOpts,
    /// Grid points (default 4001; log-concave 1001).
    #[arg(long)]
    resolution: Option<usize>,
}

#[derive(Args)]
struct SimArgs {
    /// Mixture JSON file or built-in model name.
    #[arg(long)]
    model: String,
    #[command(flatten)]
    shape: ShapeOpts,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 500)]
    bootstrap: usize,
    /// Skip bands and interval coverage.
    #[arg(long)]
    no_intervals: bool,
    /// Fixed kernel bandwidth for every replicate.
    #[arg(long)]
    bandwidth: Option<f64>,
    #[command(flatten)]
    solver: SolverOpts,
    #[arg(long, value_enum, default_value = "json")]
    output: SimFormat,
}

fn run_fit(args: &FitArgs) -> Result<(), Failure> {
    let values = input::read_sample_csv(&args.data)?;
    let shape = args.shape.spec();
    let sample = Sample::new(values)?;
    if let ShapeSpec::Monotone(StartChoice::Default) = shape {
        if let Some(&v) = sample.values().iter().find(|&&v| v < 0.0) {
            return Err(Failure::input(format!(
                "monotone shape needs data on [0, ∞) but found {v}; pass --support-start"
            )));
        }
    }
    let options = FitOptions {
        shape,
        bandwidth: args.bandwidth,
        grid_points: args.grid_points,
        logconcave: args.solver.options(),
        band: (!args.no_band).then_some(BandOptions {
            alpha: args.alpha,
            replicates: args.bootstrap,
            seed: args.seed,
            ..BandOptions::default()
        }),
    };
    eprintln!("shapemix: fitting {} observations", sample.len());
    let result = fit(&sample, &options)?;
    eprintln!(
        "shapemix: bandwidth {:.4}, pi0 {:.4}",
        result.bandwidth,
        result.pi0()
    );
    if let (Some(path), Some(report), Some(problem)) =
        (&args.dump_problem, &result.solver, &result.problem)
    {
        let file = std::fs::File::create(path)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
        problem
            .write_csv(&report.v_star, std::io::BufWriter::new(file))
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
    }
    match args.output {
        FitFormat::Json => output::print_json(&output::FitDocument::new(&result, &options, sample.len())),
        FitFormat::Csv => output::print_curves_csv(&result),
    }
}

fn run_true_pi0(args: &TruthArgs) -> Result<(), Failure> {
    let spec = input::read_model(&args.model)?;
    let shape = args.shape.spec();
    let resolution = args.resolution.unwrap_or_else(|| default_resolution(&shape));
    let pi0 = true_pi0(&spec, &shape, resolution)?;
    output::print_json(&output::TruthDocument::new(pi0, &shape, resolution))
}

fn run_simulate(args: &SimArgs) -> Result<(), Failure> {
    let spec = input::read_model(&args.model)?;
    let mut config = ReplicationConfig::new(spec, args.shape.spec(), args.n, args.reps, args.seed);
    config.alpha = args.alpha;
    config.bootstrap = args.bootstrap;
    config.intervals = !args.no_intervals;
    config.bandwidth = args.bandwidth;
    config.logconcave = args.solver.options();
    if args.n == 0 {
        return Err(Failure::input("--n must be at least 1"));
    }
    eprintln!("shapemix: {} replications of n = {}", args.reps, args.n);
    let summary = run_replications(&config)?;
    if summary.failures > 0 {
        eprintln!("shapemix: {} replications failed", summary.failures);
    }
    match args.output {
        SimFormat::Json => {
            eprint!("{summary}");
            output::print_json(&output::SimDocument::new(&summary))
        }
        SimFormat::Text => {
            print!("{summary}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Fit(a) => run_fit(a),
        Command::TruePi0(a) => run_true_pi0(a),
        Command::Simulate(a) => run_simulate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("shapemix: error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_failures_exit_3() {
        assert_eq!(Failure::from(Error::ZeroDensity).code, EXIT_NUMERIC);
        assert_eq!(Failure::from(Error::Solver("stalled".into())).code, EXIT_NUMERIC);
        assert_eq!(Failure::from(Error::InvalidArgument("bad".into())).code, EXIT_INPUT);
    }
}
