mod region_props;
mod simulate;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit status for usage and configuration errors.
const EXIT_USAGE: u8 = 2;
/// Exit status for numerical or statistical failures.
const EXIT_FAILURE: u8 = 1;

/// A failure carrying the exit status it should produce.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<bayesreg::Error> for CliError {
    fn from(e: bayesreg::Error) -> Self {
        use bayesreg::Error::*;
        match e {
            Numerical(_) => CliError::Failure(e.to_string()),
            Domain(_) | SingularFisher { .. } | Dimension { .. } | Precondition(_) | Config(_) => {
                CliError::Usage(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "bayesreg", version, about = "Credible-region accuracy, Monte Carlo validation and adaptive campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Size, credibility and λ of a likelihood region from a Fisher matrix.
    RegionProps(region_props::RegionPropsArgs),
    /// Run adaptive or nonadaptive campaigns and write CSV/JSON records.
    #[command(after_long_help = simulate::CSV_HELP)]
    Simulate(Box<SimulateArgs>),
    /// Run a validation suite; exits 1 when a check fails.
    Validate(validate::ValidateArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model: homodyne, three-path or squeezed.
    #[arg(long)]
    pub model: Option<String>,
    /// adaptive or nonadaptive.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Region kind: fixed-s, fixed-c or plausible.
    #[arg(long)]
    pub region: Option<String>,
    /// Fixed size for --region fixed-s.
    #[arg(long)]
    pub s0: Option<f64>,
    /// Fixed credibility for --region fixed-c.
    #[arg(long)]
    pub c0: Option<f64>,
    /// Total copies.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Adaptive steps; must divide N.
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Simulated datasets per grid setting.
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Settings-grid count.
    #[arg(long)]
    pub nm: Option<usize>,
    /// Independent replicas of the campaign.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path; `.csv` and `.json` files are written next to it.
    /// Without it the CSV goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("BAYESREG_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("BAYESREG_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Failure(format!("cannot build thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::RegionProps(args) => region_props::run(&args),
        Command::Simulate(args) => simulate::run(&args),
        Command::Validate(args) => validate::run(&args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
