use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gonogo_core::criteria::{CHEMICAL_ACCURACY, DEFAULT_QPE_THRESHOLD};
use gonogo_core::hchain::DEFAULT_SPACING;
use gonogo_core::itevo::{DEFAULT_DTAU, DEFAULT_TAIL_THRESHOLD, DEFAULT_TAU_MAX};

/// Default cap on statevector size for exact and simulated quantities.
pub const DEFAULT_MAX_QUBITS: usize = 24;

#[derive(Debug, Parser)]
#[command(name = "gonogo", version, about = "Go/no-go feasibility criteria for VQE and QPE on small molecules")]
pub struct Cli {
    /// Seed for randomized start vectors.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Also print the JSON result on stdout.
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,

    /// Also print the CSV result on stdout.
    #[arg(long, global = true)]
    pub csv: bool,

    /// Largest qubit count simulated exactly (at most 26).
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_QUBITS)]
    pub max_qubits: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hydrogen-chain SCF: FCIDUMP files and the N,E_HF,var_HF,E_inf table.
    Hchain(HchainArgs),
    /// Criterion report for the Hartree-Fock trial state of an FCIDUMP.
    Analyze(AnalyzeArgs),
    /// UCCSD VQE trajectory and report.
    Vqe(VqeArgs),
    /// Imaginary-time curve and overlap estimates.
    Overlap(OverlapArgs),
    /// Noise bound from numbers alone.
    Criteria(CriteriaArgs),
    /// Least-squares scaling fit of a CSV file.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct HchainArgs {
    /// Number of atoms (even).
    #[arg(long, conflicts_with = "scan", required_unless_present = "scan")]
    pub n: Option<usize>,

    /// Range `start:stop:step` of even chain lengths, inclusive.
    #[arg(long)]
    pub scan: Option<String>,

    /// Interatomic spacing in bohr.
    #[arg(long, default_value_t = DEFAULT_SPACING)]
    pub spacing: f64,
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    /// Per-gate depolarizing error rate.
    #[arg(long)]
    pub eps: Option<f64>,

    /// Two-qubit gate count, or `auto` for the UCCSD count.
    #[arg(long, default_value = "auto")]
    pub ng: String,

    /// Target accuracy in Ha.
    #[arg(long, default_value_t = CHEMICAL_ACCURACY)]
    pub eta: f64,

    /// Minimum overlap for a positive QPE verdict.
    #[arg(long, default_value_t = DEFAULT_QPE_THRESHOLD)]
    pub qpe_threshold: f64,

    /// Ground-energy estimate in Ha, used when no exact value is computed.
    #[arg(long, allow_hyphen_values = true)]
    pub e0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub fcidump: PathBuf,

    #[command(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Debug, Args)]
pub struct VqeArgs {
    pub fcidump: PathBuf,

    #[command(flatten)]
    pub noise: NoiseArgs,

    #[arg(long, default_value_t = 500)]
    pub max_steps: usize,

    /// Gradient-norm stopping threshold (Ha/rad).
    #[arg(long, default_value_t = 1e-6)]
    pub g_tol: f64,
}

#[derive(Debug, Args)]
pub struct OverlapArgs {
    pub fcidump: PathBuf,

    /// Trial state file (`qubits: n` then `re im` lines); default is the
    /// Hartree-Fock determinant.
    #[arg(long)]
    pub state: Option<PathBuf>,

    #[arg(long, default_value_t = DEFAULT_DTAU)]
    pub dtau: f64,

    #[arg(long, default_value_t = DEFAULT_TAU_MAX)]
    pub tau_max: f64,

    #[arg(long, default_value_t = DEFAULT_TAIL_THRESHOLD)]
    pub tail_threshold: f64,
}

#[derive(Debug, Args)]
pub struct CriteriaArgs {
    #[arg(long, default_value_t = CHEMICAL_ACCURACY)]
    pub eta: f64,

    /// `E_noise - E_0` in Ha.
    #[arg(long)]
    pub gap: f64,

    /// Two-qubit gate count.
    #[arg(long)]
    pub ng: f64,

    /// Error rate to test against the bound.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    /// `E = a N + b N^2`.
    Quad,
    /// `I = C x`.
    Prop,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub model: FitKind,

    pub csv_file: PathBuf,

    /// Zero-based abscissa column.
    #[arg(long, default_value_t = 0)]
    pub x_col: usize,

    /// Zero-based ordinate column.
    #[arg(long, default_value_t = 1)]
    pub y_col: usize,
}
