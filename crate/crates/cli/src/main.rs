#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

/// Treecode evaluation of the disc-model axial field.
#[derive(Parser)]
#[command(name = "disctree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Field at a set of targets.
    Evaluate(EvaluateArgs),
    /// Tree vs direct error on one instance.
    Accuracy(AccuracyArgs),
    /// Tree and direct wall times over a size sweep.
    Bench(BenchArgs),
    /// Tree wall time over a sweep of leaf depths.
    DepthScan(DepthScanArgs),
}

#[derive(Args, Clone)]
pub struct Common {
    /// Disc radius r_d.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub rd: f64,
    /// Expansion order (cap in adaptive mode).
    #[arg(long, default_value_t = 10)]
    pub p: usize,
    /// Opening angle of the acceptance test.
    #[arg(long, default_value_t = 1.0 / 3.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 40)]
    pub leaf_capacity: usize,
    /// Pick the order per interaction from the error bound.
    #[arg(long)]
    pub adaptive: bool,
    /// Absolute field tolerance for --adaptive.
    #[arg(long, default_value_t = 1e-10, requires = "adaptive")]
    pub tol: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args)]
#[group(id = "source", multiple = false)]
pub struct Source {
    /// Particle CSV with header `x,q`.
    #[arg(long)]
    pub particles: Option<PathBuf>,
    /// Density specification (JSON).
    #[arg(long)]
    pub density: Option<PathBuf>,
    /// Generate this many uniform charges on [--lo, --hi] with strengths in [0, 1).
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args)]
pub struct Generator {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub hi: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Images {
    Lower,
    Upper,
    Both,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Tree,
    Direct,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub generator: Generator,
    /// Target CSV with header `y` (a `y,E` file is accepted). Default: the source positions.
    #[arg(long)]
    pub targets: Option<PathBuf>,
    /// Add image charges across the electrodes.
    #[arg(long, value_enum, requires = "gap")]
    pub images: Option<Images>,
    /// Electrode gap length L.
    #[arg(long, allow_negative_numbers = true)]
    pub gap: Option<f64>,
    /// Position of the lower electrode.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub electrode: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Tree)]
    pub method: MethodArg,
    /// Where to write the JSON run summary (csv format only; default: stderr).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct AccuracyArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub generator: Generator,
    /// Truncation error of one cluster at y=1 for p in {5,10,15,20} (N=10^4 on [-0.5,0.5]).
    #[arg(long, conflicts_with_all = ["table4", "source"])]
    pub table1: bool,
    /// Full evaluation at p=10 for N in {10^4, 2*10^5}.
    #[arg(long, conflicts_with = "source")]
    pub table4: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Comma-separated system sizes.
    #[arg(long, value_delimiter = ',', default_value = "10000,50000,100000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Skip the direct baseline.
    #[arg(long)]
    pub no_direct: bool,
    /// Sizes 10^4, 5*10^4, 10^5, 2*10^5 with 3 repeats and the direct baseline.
    #[arg(long, conflicts_with_all = ["sizes", "repeats", "no_direct"])]
    pub table3: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct DepthScanArgs {
    #[arg(long, default_value_t = 200_000)]
    pub n: usize,
    /// Comma-separated maximum depths.
    #[arg(long, value_delimiter = ',', default_value = "8,9,10,11,12,13,14,15")]
    pub depths: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// N=2*10^5, p=10, depths 8..=15, 3 repeats.
    #[arg(long, conflicts_with_all = ["n", "depths", "repeats"])]
    pub table2: bool,
    #[command(flatten)]
    pub common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Accuracy(a) => commands::accuracy(a),
        Command::Bench(a) => commands::bench(a),
        Command::DepthScan(a) => commands::depth_scan(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("disctree: {e}");
            e.exit_code()
        }
    }
}

impl Common {
    fn install_threads(&self) -> Result<(), CliError> {
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(CliError::Usage("--threads must be >= 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| CliError::Internal(e.to_string()))?;
        }
        Ok(())
    }
}
