//! Command-line driver: runs the checks, prints a summary and writes a
//! tab-separated table and a JSON report.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 for
//! unusable arguments or inputs, 3 for I/O failures.

mod commands;
pub mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qrecover::entropy::Unit;
use qrecover::verify::report::CheckRow;
use serde::{Deserialize, Serialize};

pub use output::write_atomic;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] qrecover::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qrecover::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Read { .. } | CliError::Write { .. } | CliError::Core(E::Io { .. }) => EXIT_IO,
            CliError::Core(E::Numerical(_)) => EXIT_CHECK_FAILED,
            CliError::Core(_) => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qrecover", version, about = "Checks remainder-term entropy inequalities with universal recovery maps")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_unit(s: &str) -> Result<Unit, String> {
    s.parse().map_err(|e: qrecover::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Root seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Quadrature nodes for the recovery map (default 129).
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Entropy unit for printed values and tables: nats or bits.
    #[arg(long, global = true, value_parser = parse_unit)]
    pub unit: Option<Unit>,
    /// Slack tolerance (default 1e-8).
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Directory for report files; falls back to QRECOVER_OUTPUT_DIR.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Renormalize reported recovered states to unit trace.
    #[arg(long, global = true)]
    pub renormalize: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Data-processing inequality with the universal recovery map.
    VerifyDpi(DpiArgs),
    /// Strong subadditivity with remainder.
    VerifySsa(SsaArgs),
    /// Concavity of conditional entropy and joint convexity of relative
    /// entropy, with remainders, on random ensembles.
    VerifyCorollaries(CorollaryArgs),
    /// Approximate error correction bounds.
    Qec(QecArgs),
    /// Seeded random sweep of the data-processing remainder.
    Sweep(SweepArgs),
    /// Nodes and weights of the quadrature rule.
    QuadratureInfo(QuadratureArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyDpi(_) => "verify-dpi",
            Command::VerifySsa(_) => "verify-ssa",
            Command::VerifyCorollaries(_) => "verify-corollaries",
            Command::Qec(_) => "qec",
            Command::Sweep(_) => "sweep",
            Command::QuadratureInfo(_) => "quadrature-info",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Example {
    /// ρ = diag(1/2, 1/2), σ = diag(1/4, 3/4), completely depolarizing qubit channel.
    ClassicalDepolarizing,
}

#[derive(Debug, Args)]
pub struct DpiArgs {
    /// Instance file with `rho`, `sigma` and `channel`.
    #[arg(long, conflicts_with = "example")]
    pub instance: Option<PathBuf>,
    /// Bundled instance.
    #[arg(long, value_enum)]
    pub example: Option<Example>,
    /// Input dimension of a random instance.
    #[arg(long, default_value_t = 3)]
    pub dim_in: usize,
    /// Output dimension of a random instance.
    #[arg(long, default_value_t = 2)]
    pub dim_out: usize,
    /// Environment dimension of a random instance.
    #[arg(long, default_value_t = 2)]
    pub env: usize,
    /// Also check the Rényi bound at these α ∈ [1/2, 1), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Write the recovery map to this file.
    #[arg(long)]
    pub save_recovery: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SsaArgs {
    /// State file for ρ_ABC; random when absent.
    #[arg(long, conflicts_with = "ghz")]
    pub state: Option<PathBuf>,
    /// Dimensions of A, B and C.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [2, 2, 2])]
    pub dims: Vec<usize>,
    /// Use the GHZ state on three qubits.
    #[arg(long)]
    pub ghz: bool,
}

#[derive(Debug, Args)]
pub struct CorollaryArgs {
    /// Number of random ensembles per inequality.
    #[arg(long, default_value_t = 10)]
    pub ensembles: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QecPreset {
    /// Three-qubit repetition code under single bit flips.
    BitFlip,
    /// Random code under depolarizing noise.
    Depolarizing,
    /// Random code under a random channel.
    Random,
}

#[derive(Debug, Args)]
pub struct QecArgs {
    #[arg(long, value_enum, default_value_t = QecPreset::BitFlip)]
    pub preset: QecPreset,
    /// Flip probability for the bit-flip preset.
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    /// Depolarizing parameter.
    #[arg(long, default_value_t = 0.2)]
    pub lambda: f64,
    /// Physical dimension for random codes.
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    /// Code dimension for random codes.
    #[arg(long, default_value_t = 2)]
    pub code_dim: usize,
    /// Environment dimension of the random channel.
    #[arg(long, default_value_t = 2)]
    pub env: usize,
    /// Number of sampled code states.
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Number of instances.
    #[arg(long)]
    pub count: Option<usize>,
    /// Dimension range such as `2..5` (inclusive).
    #[arg(long, value_parser = config::parse_dim_range)]
    pub dims: Option<(usize, usize)>,
    /// Largest environment dimension.
    #[arg(long)]
    pub env_max: Option<usize>,
    /// Record per-instance wall times (reports stop being reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct QuadratureArgs {
    /// Use the β_θ density instead of β₀.
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
}

/// The JSON report of every command except `sweep`. Entropies are in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub nodes: usize,
    pub tolerance: f64,
    pub passed: bool,
    pub checks: Vec<CheckRow>,
    pub details: serde_json::Value,
}

/// What a command produced.
pub struct Produced {
    pub json: String,
    pub table: String,
    pub summary: String,
    pub passed: bool,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(passed) => {
            if passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("run `qrecover --help` for usage");
            }
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let file = match &cli.common.config {
        Some(p) => config::FileConfig::load(p)?,
        None => config::FileConfig::default(),
    };
    let settings = config::Settings::resolve(&cli.common, &file)?;
    if settings.nodes < qrecover::quadrature::MIN_NODES {
        return Err(CliError::Usage(format!(
            "--nodes must be at least {}",
            qrecover::quadrature::MIN_NODES
        )));
    }
    let produced = match &cli.command {
        Command::VerifyDpi(a) => commands::verify_dpi(&settings, a)?,
        Command::VerifySsa(a) => commands::verify_ssa(&settings, a)?,
        Command::VerifyCorollaries(a) => commands::verify_corollaries(&settings, a)?,
        Command::Qec(a) => commands::qec(&settings, a)?,
        Command::Sweep(a) => commands::sweep(&settings, &file.sweep, a)?,
        Command::QuadratureInfo(a) => commands::quadrature_info(&settings, a)?,
    };
    print!("{}", produced.summary);
    if let Some(dir) = &settings.output {
        let name = cli.command.name();
        let json_path = dir.join(format!("{name}.json"));
        let table_path = dir.join(format!("{name}.tsv"));
        write_atomic(&json_path, &produced.json)?;
        write_atomic(&table_path, &produced.table)?;
        println!("wrote {} and {}", json_path.display(), table_path.display());
    }
    Ok(produced.passed)
}
