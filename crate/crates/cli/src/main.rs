use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hardy_core::report::{RunReport, CSV_COLUMNS};

mod commands;

const VERSION: &str = env!("HARDY_VERSION");

#[derive(Parser)]
#[command(name = "hardy", version = VERSION, about = "Constants, checks and Monte Carlo quotients for many-particle Hardy inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the table of constants for given d and N.
    Bounds(BoundsArgs),
    /// Run verification suites; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Estimate the Rayleigh quotient of a single trial function.
    Quotient(QuotientArgs),
    /// Search for large K lower bounds or small quotients.
    Optimize(OptimizeArgs),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct Sampling {
    /// Monte Carlo samples per estimate.
    #[arg(long, default_value_t = 200_000)]
    samples: u64,
    #[arg(long, env = "HARDY_SEED", default_value_t = 0)]
    seed: u64,
    /// Samples per parallel chunk; results are reproducible for a fixed seed and chunk size.
    #[arg(long, default_value_t = 4096)]
    chunk_size: u64,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    d: usize,
    #[arg(long = "N")]
    n: usize,
    /// Magnetic flux, exact as `p/q` or an integer, otherwise a decimal.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Curvature constant K.
    #[arg(long = "K")]
    k: Option<f64>,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Geometry,
    Fields,
    Identities,
    Hardy,
    Sharpness,
    Fermion,
    Magnetic,
    Curvature,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    #[command(flatten)]
    sampling: Sampling,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Gaussian,
    Sharpness1d,
    Slater,
    Odd,
    Abmode,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    PowerExp,
    LogPlateau,
}

#[derive(Args)]
struct QuotientArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "N")]
    n: Option<usize>,
    /// Gaussian width.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Sharpness parameter, `α = 1/4 + δ`.
    #[arg(long)]
    delta: Option<f64>,
    /// Aharonov–Bohm flux.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Angular momentum of the AB mode.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
    m: i64,
    #[arg(long, value_enum, default_value_t = Profile::PowerExp)]
    profile: Profile,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 10.0)]
    radius: f64,
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[command(flatten)]
    sampling: Sampling,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    #[value(name = "K")]
    K,
    Quotient,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchFamily {
    /// Isotropic Gaussian product, searching over the width.
    Gaussian,
    /// Unit Gaussian product, searching over the centers.
    GaussianCenters,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long, value_enum)]
    target: Target,
    #[arg(long)]
    d: usize,
    /// Number of atoms of the K measure.
    #[arg(long, default_value_t = 3)]
    atoms: usize,
    #[arg(long, value_enum, default_value_t = SearchFamily::Gaussian)]
    family: SearchFamily,
    #[arg(long = "N")]
    n: Option<usize>,
    /// Ascent iterations per restart, or Nelder–Mead evaluations.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Monte Carlo samples per quotient evaluation.
    #[arg(long, default_value_t = 50_000)]
    samples: u64,
    #[arg(long, env = "HARDY_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4096)]
    chunk_size: u64,
    /// Write the best-so-far trace as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// Why a command did not succeed.
pub enum Failure {
    /// Bad parameters; exit code 2.
    Usage(String),
    /// A check failed or a computation broke down; exit code 1.
    Check(String),
}

impl From<hardy_core::Error> for Failure {
    fn from(e: hardy_core::Error) -> Self {
        use hardy_core::Error::*;
        match e {
            Domain(_) | InvalidInput(_) | DegenerateOrbitals(..) | NonIntegrableProfile(_) | CoincidentAtoms(..) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

fn emit(report: &RunReport, format: Format) -> std::io::Result<()> {
    let mut stdout = std::io::stdout().lock();
    match format {
        Format::Json => writeln!(stdout, "{}", report.to_json()),
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(stdout);
            w.write_record(CSV_COLUMNS)?;
            for row in report.csv_rows() {
                w.serialize(row)?;
            }
            w.flush()
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let start = Instant::now();
    let (result, format) = match cli.command {
        Command::Bounds(a) => (commands::bounds(&a), a.out.format),
        Command::Verify(a) => (commands::verify(&a), a.out.format),
        Command::Quotient(a) => (commands::quotient(&a), a.out.format),
        Command::Optimize(a) => (commands::optimize(&a), a.format),
    };
    match result {
        Ok(mut report) => {
            report.wall_time_ms = start.elapsed().as_millis() as u64;
            if let Err(e) = emit(&report, format) {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(1);
            }
            if report.suite_pass == Some(false) {
                for c in commands::failed_checks(&report) {
                    eprintln!("FAIL {}.{}: value {} target {} ({})", c.suite, c.name, c.value, c.target, c.detail);
                }
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
