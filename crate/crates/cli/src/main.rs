//! gp-dirichlet: reproducible kernel, Besov and sampling experiments.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_TRUNCATION: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "gp-dirichlet", version, about = "Kernels, Besov band sums and Gaussian paths on spaces with spectral structure")]
pub struct Cli {
    /// Where to write the run manifest (default: next to the output file, or stderr).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Gegenbauer coefficients B_j of a power series.
    Expand(ExpandArgs),
    /// Gram-matrix definiteness test for a kernel or a metric power.
    KernelCheck(KernelCheckArgs),
    /// Band sums S_j and the fitted Besov exponent.
    Besov(BesovArgs),
    /// Sample Gaussian paths split into dyadic bands.
    Simulate(SimulateArgs),
    /// Fit the path regularity exponent from a simulate CSV.
    Regularity(RegularityArgs),
    /// Run the acceptance suite.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    /// arcsin, monomial:n or hyp:a,b,c
    #[arg(long)]
    pub function: String,
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    #[arg(long, default_value_t = 200)]
    pub jmax: usize,
    /// j range for the decay fit, lo:hi (default 8:jmax)
    #[arg(long)]
    pub fit: Option<String>,
    /// cap on inner-series terms
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Args, Debug)]
pub struct KernelCheckArgs {
    #[arg(long)]
    pub space: Option<String>,
    /// kernel name, or rho:alpha for a metric power in nd mode
    #[arg(long)]
    pub kernel: String,
    #[arg(long, default_value = "pd")]
    pub mode: String,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// comma-separated t values: test exp(-t psi) for positive definiteness
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Args, Debug)]
pub struct BesovArgs {
    #[arg(long)]
    pub space: Option<String>,
    /// kernel name, synthetic:s or white
    #[arg(long)]
    pub kernel: String,
    #[arg(long, default_value_t = 12)]
    pub jmax: usize,
    /// lo:hi (default 4:jmax-2)
    #[arg(long)]
    pub fit: Option<String>,
    /// net, grid or diag
    #[arg(long, default_value = "net")]
    pub disc: String,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long)]
    pub kernel: String,
    /// exponent for fractional kernels
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 8)]
    pub jmax: usize,
    #[arg(long, default_value_t = 64)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// finest net scale (default 2^-jmax)
    #[arg(long)]
    pub net_delta: Option<f64>,
    /// auto, kl or joint
    #[arg(long, default_value = "auto")]
    pub method: String,
    #[arg(long, default_value = "-")]
    pub out: String,
    /// points sidecar (default <out stem>.points.csv; required to get one with --out -)
    #[arg(long)]
    pub points_out: Option<String>,
}

#[derive(Args, Debug)]
pub struct RegularityArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// lo:hi
    #[arg(long)]
    pub fit: String,
    /// divide E_j by sqrt(1 + j d ln 2) before fitting
    #[arg(long)]
    pub pisier_correct: bool,
    /// use sqrt(1 + j ln 2) instead of the dimension-weighted factor
    #[arg(long, requires = "pisier_correct")]
    pub pisier_j_only: bool,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// criterion ids or tags, comma separated (windows, special, kernels, slopes, besov, nets, sim, fast)
    #[arg(long)]
    pub only: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "-")]
    pub out: String,
}

fn configure_threads() {
    if let Some(n) = std::env::var("GP_DIRICHLET_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code_for(&e))
        }
    }
}
