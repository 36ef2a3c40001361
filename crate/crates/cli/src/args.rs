use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isocurse::complexity::SequenceSpec;
use isocurse::sampling::Measure;
use isocurse::Exponent;

#[derive(Debug, Parser)]
#[command(
    name = "isocurse",
    version,
    about = "Reproducible experiments on volume-normalized l_p balls",
    long_about = "Reproducible experiments on volume-normalized l_p balls.\n\n\
        Every command is a pure function of its flags and --seed. Set ISOCURSE_THREADS \
        to choose the worker count; it never changes the output.\n\n\
        Exit status: 0 success, 1 I/O failure, 2 usage error, 3 numerical failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form geometry per (d, p) and the radius-ratio certificate.
    Geometry(GeometryArgs),
    /// Draw points from a body and export them.
    Sample(SampleArgs),
    /// Thin-shell tails and psi_alpha constants of isotropic samples.
    Concentrate(ConcentrateArgs),
    /// Build fooling functions on random nodes, certify them and bound their integrals.
    Fool(FoolArgs),
    /// Curse condition, complexity bounds and the empirical adversary for given A_d, B_d.
    CurseReport(CurseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleFormat {
    Csv,
    Json,
    /// 16-byte header (d, n as little-endian u64) then little-endian f64 rows.
    Bin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Cone,
    Uniform,
    Normalized,
    Isotropic,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::Cone => Measure::Cone,
            MeasureArg::Uniform => Measure::UniformBall,
            MeasureArg::Normalized => Measure::UniformNormalized,
            MeasureArg::Isotropic => Measure::IsotropicRescaled,
        }
    }
}

#[derive(Debug, Args)]
pub struct Grid {
    /// Dimensions, comma separated.
    #[arg(long = "d", value_delimiter = ',', num_args = 1.., default_value = "2,4,8,16,32,64")]
    pub d: Vec<usize>,
    /// Exponents p >= 1, comma separated; `inf` for the cube.
    #[arg(long = "p", value_delimiter = ',', num_args = 1.., default_value = "2,3,4,8,inf", value_parser = parse_exponent)]
    pub p: Vec<Exponent>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[command(flatten)]
    pub grid: Grid,
    /// Number of log-spaced exponents in the monotonicity certificate.
    #[arg(long, default_value_t = 200)]
    pub certificate_grid: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long = "d")]
    pub d: usize,
    #[arg(long = "p", value_parser = parse_exponent)]
    pub p: Exponent,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MeasureArg::Isotropic)]
    pub measure: MeasureArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SampleFormat::Csv)]
    pub format: SampleFormat,
}

#[derive(Debug, Args)]
pub struct ConcentrateArgs {
    #[command(flatten)]
    pub grid: Grid,
    /// Isotropic samples per body; at least 10000.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shell deviations t; tails are P(||X|| >= (1+t)√d) and P(||X|| <= (1-t)√d).
    #[arg(long = "t", value_delimiter = ',', num_args = 1.., default_value = "0.05,0.1,0.2,0.3,0.5")]
    pub t: Vec<f64>,
    /// Also report the psi_alpha norm of <X, e_1> for this alpha in [1, 2].
    #[arg(long)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FoolArgs {
    #[command(flatten)]
    pub grid: Grid,
    /// Monte Carlo samples for the integral of each fooling function.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of uniform nodes the fooling function vanishes on.
    #[arg(long, default_value_t = 8)]
    pub n_points: usize,
    /// Smoothing width; defaults to the admissible default of each body.
    #[arg(long)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CurseArgs {
    #[command(flatten)]
    pub grid: Grid,
    /// Lipschitz constant sequence A_d, e.g. `d^(-1/2)`.
    #[arg(long = "A-seq", value_parser = parse_sequence)]
    pub a_seq: SequenceSpec,
    /// Gradient Lipschitz sequence B_d, e.g. `1/d`.
    #[arg(long = "B-seq", value_parser = parse_sequence)]
    pub b_seq: SequenceSpec,
    /// Samples for Monte Carlo steps (adversary integrals, first moments).
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Smoothing width for the adversary; defaults per body.
    #[arg(long)]
    pub delta: Option<f64>,
    /// psi_alpha exponent in [1, 2] for the lower-bound count; defaults to min(p, 2).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Volume decay base q in (0, 1) for the lower-bound count.
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    /// Prefactor C > 0 for the lower-bound count.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Error level in (0, 1) for the lower-bound count.
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// Estimate the first moment by Monte Carlo instead of bounding it by sqrt(d) L.
    #[arg(long)]
    pub mc_first_moment: bool,
    /// Run the empirical adversary only for d up to this value.
    #[arg(long, default_value_t = 16)]
    pub adversary_max_d: usize,
    #[arg(long, default_value_t = 8)]
    pub n_points: usize,
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    /// Monte Carlo samples per adversary trial.
    #[arg(long, default_value_t = 20_000)]
    pub mc_n: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    s.parse::<Exponent>().map_err(|e| e.to_string())
}

fn parse_sequence(s: &str) -> Result<SequenceSpec, String> {
    s.parse::<SequenceSpec>().map_err(|e| e.to_string())
}
