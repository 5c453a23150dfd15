mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use wgraph_core::{FamilyKind, ProbeMode, VertexId};

/// Weighted graph Laplacians, Schrödinger operators and self-adjointness probes.
#[derive(Debug, Parser)]
#[command(name = "wgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply the weighted Laplacian Δ_{ω,c}.
    #[command(subcommand)]
    Laplacian(LaplacianCommand),
    /// Gauge transform to a Schrödinger operator.
    #[command(subcommand)]
    Gauge(GaugeCommand),
    /// Dirichlet problems on finite regions.
    #[command(subcommand)]
    Dirichlet(DirichletCommand),
    /// Positive harmonic functions by ball exhaustion.
    #[command(subcommand)]
    Harmonic(HarmonicCommand),
    /// The path metric δ_a.
    #[command(subcommand)]
    Metric(MetricCommand),
    /// Essential self-adjointness probes on half-lines.
    #[command(subcommand)]
    Esa(EsaCommand),
    /// Run a worked example and its checks (`all` runs every one).
    Examples {
        name: String,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Subcommand)]
enum LaplacianCommand {
    /// Evaluate Δ_{ω,c}f on the support of f and its neighbors.
    Apply {
        #[command(flatten)]
        graph: GraphArgs,
        /// `vertex value` lines; a seeded random function when absent.
        #[arg(long)]
        function: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Subcommand)]
enum GaugeCommand {
    /// Tabulate ω, W and Σa at each vertex.
    ToSchrodinger {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Subcommand)]
enum DirichletCommand {
    /// Solve Pf = 0 on the interior of a combinatorial ball.
    Solve {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value_t = OperatorKind::Laplacian)]
        operator: OperatorKind,
        /// Ball center; defaults to the first vertex.
        #[arg(long)]
        center: Option<u64>,
        #[arg(long, default_value_t = 5)]
        radius: usize,
        /// `vertex value` lines covering the boundary.
        #[arg(long)]
        boundary: Option<PathBuf>,
        /// Constant boundary value when no boundary file is given.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        boundary_value: f64,
        /// Residual tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Also verify the Harnack inequality on every interior pair.
        #[arg(long)]
        harnack: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Subcommand)]
enum HarmonicCommand {
    /// Build Φ > 0 with PΦ = 0 for the gauge operator.
    Build {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        anchor: Option<u64>,
        #[arg(long, default_value_t = 200)]
        n_max: usize,
        #[arg(long, default_value_t = 30)]
        window: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Subcommand)]
enum MetricCommand {
    /// δ_a between two vertices.
    Distance {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        #[arg(long, value_enum, default_value_t = Coefficients::Conductance)]
        coefficients: Coefficients,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Vertices within δ_a ≤ R of a center.
    Ball {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        center: Option<u64>,
        #[arg(long)]
        radius: f64,
        #[arg(long, value_enum, default_value_t = Coefficients::Conductance)]
        coefficients: Coefficients,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Completeness of the gauge metric on a half-line family.
    Completeness {
        #[command(flatten)]
        graph: GraphArgs,
        /// Probe the partial sums up to start + n-max.
        #[arg(long, default_value_t = 100_000)]
        n_max: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Subcommand)]
enum EsaCommand {
    /// Deficiency recurrence, ℓ² classification and certificates.
    Probe {
        #[command(flatten)]
        graph: GraphArgs,
        /// `laplacian` or `schrodinger` (shifted Schrödinger operator).
        #[arg(long, default_value = "laplacian", value_parser = parse_mode)]
        mode: ProbeMode,
        /// Longest horizon tried.
        #[arg(long, default_value_t = 1_000_000)]
        n_max: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn parse_mode(s: &str) -> Result<ProbeMode, String> {
    s.parse()
}

/// Where the graph comes from: a generated family, a config file or an edge list.
#[derive(Debug, Clone, Args)]
struct GraphArgs {
    #[arg(long)]
    family: Option<FamilyKind>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[arg(long)]
    start: Option<u64>,
    /// Edge list (`u v c` lines, optional `w u omega` lines).
    #[arg(long, conflicts_with_all = ["family", "config"])]
    graph_file: Option<PathBuf>,
    /// `key = value` family config or edge list; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct RangeArgs {
    /// First vertex of the range.
    #[arg(long)]
    from: Option<u64>,
    /// Last vertex of the range.
    #[arg(long)]
    to: Option<u64>,
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OperatorKind {
    /// Δ_{ω,c} through its gauge transform Δ_{1,a} + W.
    Laplacian,
    /// Δ_{1,c} with W = 0.
    Combinatorial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Coefficients {
    /// a = c.
    Conductance,
    /// a = c/(ω_x ω_y).
    Gauge,
}

/// Failure classes, each with its own exit code.
#[derive(Debug)]
enum CliError {
    Domain(String),
    Verification(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<wgraph_core::Error> for CliError {
    fn from(e: wgraph_core::Error) -> Self {
        match e {
            wgraph_core::Error::Io(e) => CliError::Io(e.to_string()),
            wgraph_core::Error::Violation(_) => CliError::Verification(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn vid(x: u64) -> VertexId {
    VertexId(x)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = match &e {
                CliError::Domain(m) => format!("error: {m}"),
                CliError::Verification(m) => format!("verification failed: {m}"),
                CliError::Io(m) => format!("i/o error: {m}"),
            };
            eprintln!("{message}");
            ExitCode::from(e.code())
        }
    }
}
