//! `commonlines`: reproducible experiments for common-lines orientation
//! recovery.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or IO error,
//! 3 malformed input data.

mod commands;

use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commonlines::kernels::KernelKind;
use commonlines::verify::Suite;
use commonlines::Error;
use serde::Serialize;
use tracing::Level;

#[derive(Parser, Debug)]
#[command(name = "commonlines", version, about = "Orientation recovery from common lines")]
struct Cli {
    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log progress and stage timings to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample directions and write the exact common-lines datum and ground truth.
    OracleDatum(OracleDatumArgs),
    /// Slice a phantom, add noise, detect common lines and write the results.
    Simulate(SimulateArgs),
    /// Recover the plane embeddings from a datum and report the spectrum.
    Reconstruct(ReconstructArgs),
    /// Run a verification suite and write its verdict.
    Verify(VerifyArgs),
    /// Dump the spectrum of an operator as CSV.
    Spectrum(SpectrumArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct OracleDatumArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out_datum: PathBuf,
    #[arg(long)]
    pub out_truth: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Signal-to-noise ratio; 0 means noiseless.
    #[arg(long, default_value_t = 0.0)]
    pub snr: f64,
    #[arg(long, default_value_t = 360)]
    pub n_theta: usize,
    #[arg(long, default_value_t = 64)]
    pub n_r: usize,
    #[arg(long, default_value_t = 32.0)]
    pub r_max: f64,
    /// Phantom JSON (`{ "components": [{ center, amplitude, sigma }] }`);
    /// a seeded default phantom is used when absent.
    #[arg(long)]
    pub phantom: Option<PathBuf>,
    #[arg(long)]
    pub out_datum: PathBuf,
    #[arg(long)]
    pub out_truth: PathBuf,
    /// Detection scores, degenerate pairs and error summary.
    #[arg(long)]
    pub out_detection: PathBuf,
    /// Binary slice container.
    #[arg(long, requires = "out_slices_meta")]
    pub out_slices: Option<PathBuf>,
    /// JSON sidecar of the slice container.
    #[arg(long, requires = "out_slices")]
    pub out_slices_meta: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub datum: PathBuf,
    /// Ground truth to register against.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub out_report: PathBuf,
    #[arg(long)]
    pub out_spectrum: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteArg {
    Eigenvalues,
    Quadrature,
    Clusters,
    Isometry,
    KernelIdentities,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Eigenvalues => Suite::Eigenvalues,
            SuiteArg::Quadrature => Suite::Quadrature,
            SuiteArg::Clusters => Suite::Clusters,
            SuiteArg::Isometry => Suite::Isometry,
            SuiteArg::KernelIdentities => Suite::KernelIdentities,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: SuiteArg,
    /// Node count (clusters: 400, isometry: 500).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Clusters checked by the clusters suite.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub kernel_pairs: Option<usize>,
    #[arg(long)]
    pub trace_samples: Option<usize>,
    #[arg(long)]
    pub tol_eigenvalue: Option<f64>,
    #[arg(long)]
    pub tol_quadrature: Option<f64>,
    #[arg(long)]
    pub tol_generating: Option<f64>,
    #[arg(long)]
    pub tol_coefficients: Option<f64>,
    #[arg(long)]
    pub tol_trace: Option<f64>,
    #[arg(long)]
    pub tol_canonical: Option<f64>,
    #[arg(long)]
    pub tol_kernel: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Common,
    Orthographic,
    Transport,
}

impl From<KindArg> for KernelKind {
    fn from(k: KindArg) -> KernelKind {
        match k {
            KindArg::Common => KernelKind::Common,
            KindArg::Orthographic => KernelKind::Orthographic,
            KindArg::Transport => KernelKind::Transport,
        }
    }
}

#[derive(Args, Debug, Serialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["datum", "truth", "n"]))]
pub struct SpectrumArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Common)]
    pub kind: KindArg,
    /// Common-lines datum (common kind only).
    #[arg(long)]
    pub datum: Option<PathBuf>,
    /// Ground-truth directions.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Sample this many uniform directions instead of reading a file.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Match the leading clusters up to this index.
    #[arg(long, requires = "out_clusters")]
    pub n_max: Option<usize>,
    /// Half-width of the cluster windows (default: per-cluster).
    #[arg(long, requires = "n_max")]
    pub window: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, requires = "n_max")]
    pub out_clusters: Option<PathBuf>,
}

/// Failure of a command, carrying its exit code.
pub enum Failure {
    Verification,
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::MalformedDatum { .. }
        | Error::MalformedInput(_)
        | Error::NonUnit { .. }
        | Error::Json(_)
        | Error::DimensionMismatch { .. }
        | Error::AntipodalOrEqual { .. }
        | Error::DegeneratePair { .. } => 3,
        Error::Io(_) | Error::InvalidArgument(_) => 2,
        _ => 1,
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => Level::WARN,
        1 => Level::INFO,
        _ => Level::DEBUG,
    };
    tracing_subscriber::fmt()
        .with_max_level(level)
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .without_time()
        .init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::OracleDatum(a) => commands::oracle_datum(a, cli.threads),
        Command::Simulate(a) => commands::simulate(a, cli.threads),
        Command::Reconstruct(a) => commands::reconstruct(a, cli.threads),
        Command::Verify(a) => commands::verify(a, cli.threads),
        Command::Spectrum(a) => commands::spectrum(a, cli.threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
