mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use commands::CliError;

/// Synthesize, verify and export programmable unitary gates.
#[derive(Debug, Parser)]
#[command(name = "phasegate", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize layer parameters for a target and write a JSON report.
    Synthesize(SynthesizeArgs),
    /// Re-evaluate a report in the abstract, wave-optics or path model.
    Verify(VerifyArgs),
    /// Fidelity and probability curves as CSV.
    Sweep(SweepArgs),
    /// Replicate a gate onto several channel groups.
    Parallelize(ParallelizeArgs),
    /// Write SLM phase masks (and optionally field snapshots) for a report.
    ExportMasks(ExportArgs),
    /// Print a report summary.
    Report(ReportArgs),
}

/// Settings shared by commands that build a gate from scratch. Flags
/// override the config file, which overrides the defaults.
#[derive(Debug, Args, Default)]
struct GateArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target name: hadamardN, dftN, clockN, identityN, random-haar.
    #[arg(long)]
    target: Option<String>,
    /// Target dimension for names without a suffix.
    #[arg(long)]
    n: Option<usize>,
    /// Odd layer count M >= 3.
    #[arg(long)]
    layers: Option<usize>,
    /// Guard channels d on each side.
    #[arg(long)]
    guard: Option<usize>,
    /// DFT dimension K.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    center: Option<usize>,
    #[arg(long)]
    policy: Option<phasegate::synthesis::BoundaryPolicy>,
    /// Optimizer seed; also seeds random targets unless --target-seed is given.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    target_seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Harmonics per angular series.
    #[arg(long)]
    harmonics: Option<usize>,
}

#[derive(Debug, Args)]
struct SynthesizeArgs {
    #[command(flatten)]
    gate: GateArgs,
    /// Output report path.
    #[arg(long, short, default_value = "report.json")]
    out: PathBuf,
    /// Record the wall-clock time in the report (breaks bitwise reproducibility).
    #[arg(long)]
    timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyMode {
    Abstract,
    Wave,
    Path,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    report: PathBuf,
    #[arg(long, value_enum, default_value = "abstract")]
    mode: VerifyMode,
    /// Optics and path settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Store the measured metrics in this report file.
    #[arg(long)]
    update: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepKind {
    Guard,
    Separation,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(value_enum)]
    kind: SweepKind,
    #[command(flatten)]
    gate: GateArgs,
    /// Guard values for a guard sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0usize, 1, 2, 3, 4])]
    d: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![
        phasegate::synthesis::BoundaryPolicy::Open,
        phasegate::synthesis::BoundaryPolicy::Filtered,
    ])]
    policies: Vec<phasegate::synthesis::BoundaryPolicy>,
    /// Report whose parameters are kept fixed (guard sweep) or replicated
    /// (separation sweep, required).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Channel separations for a separation sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 3, 4, 5, 6, 7, 8])]
    separations: Vec<usize>,
    /// CSV output; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParallelizeArgs {
    report: PathBuf,
    /// Centre channel of each copy.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    centers: Vec<usize>,
    #[arg(long, short, default_value = "parallel.json")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExportArgs {
    report: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "masks")]
    out_dir: PathBuf,
    /// Also drive the first encoding channel through the wave model and
    /// export every intermediate plane.
    #[arg(long)]
    snapshots: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct ReportArgs {
    report: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("PHASEGATE_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Usage(format!("PHASEGATE_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.into()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Synthesize(a) => commands::synthesize(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Parallelize(a) => commands::parallelize(a),
        Command::ExportMasks(a) => commands::export_masks(a),
        Command::Report(a) => commands::report(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
