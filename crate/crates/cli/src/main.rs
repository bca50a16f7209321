//! `kinklab`: criterion tables, threshold scans, figure data, spectra and
//! kink simulations from the command line.
//!
//! Exit status: 0 success, 1 a requested check failed, 2 usage or
//! validation error, 3 no result (for example no threshold in the range),
//! 4 runtime abort.

// `!(x > 0.0)` rejects NaN as well as non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kinklab_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "kinklab",
    version,
    about = "Kink stability analysis for scalar field models on the line"
)]
pub struct Cli {
    /// Print records as JSON instead of a text table
    #[arg(long, global = true)]
    pub json: bool,

    /// Worker threads for sweep and figures (default: logical cores)
    #[arg(long, global = true, env = "KINKLAB_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

/// Potential selection shared by several subcommands.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Built-in family: sg, phi4, phi6, phi8, phi10, w4n, w4n2, sg4n, sg4n2, dsg1, dsg2
    #[arg(long, required_unless_present = "def")]
    pub family: Option<String>,

    /// Parameter m of phi8 and phi10
    #[arg(long)]
    pub m: Option<f64>,

    /// Comma-separated wells 1 = m1 < m2 < ... of w4n and w4n2
    #[arg(long)]
    pub wells: Option<String>,

    /// Parameter eta of dsg1 and dsg2
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,

    /// Order n of sg4n and sg4n2
    #[arg(long)]
    pub n: Option<usize>,

    /// Potential definition file (polynomial, trigpoly or product)
    #[arg(long, conflicts_with = "family")]
    pub def: Option<PathBuf>,
}

/// Kink selection: an explicit pair of adjacent wells or an index. Without
/// either, the first kink whose right well is positive.
#[derive(Args, Debug, Clone)]
pub struct PairArgs {
    /// Adjacent wells "left,right"
    #[arg(long, allow_hyphen_values = true, conflicts_with = "pair_index")]
    pub pair: Option<String>,

    /// Index of the pair of consecutive wells, counted from the left
    #[arg(long)]
    pub pair_index: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the wells of a potential with W'' and the decay rates
    Wells {
        #[command(flatten)]
        model: ModelArgs,
        /// Write the table as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify kinks with the repulsivity criterion on the transformed potential
    Check {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        pair: PairArgs,
        /// Classify every kink of the potential
        #[arg(long, conflicts_with_all = ["pair", "pair_index"])]
        all_pairs: bool,
        /// Chebyshev samples of V' on each kink range
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a kink profile and its diagnostics
    Kink {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 0.01)]
        dx: f64,
        /// Half-width of the grid (default 20/omega)
        #[arg(long)]
        half_width: Option<f64>,
        /// Write x, H, H', H'' as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate a satisfied/inconclusive transition in a family parameter
    Sweep {
        /// One-parameter family: phi8, phi10, dsg1, dsg2
        #[arg(long)]
        family: String,
        /// Parameter range "lo,hi"
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        /// Kink whose left well is this value
        #[arg(long, allow_negative_numbers = true, group = "selector")]
        pair_start: Option<f64>,
        /// Kink whose right well is this value
        #[arg(long, allow_negative_numbers = true, group = "selector")]
        pair_end: Option<f64>,
        /// Kink by index of consecutive wells
        #[arg(long, group = "selector")]
        pair_index: Option<usize>,
        /// Width of the final bracket
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Coarse grid points classified in parallel before bisection
        #[arg(long, default_value_t = 17)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sign grid and zero contour of V' over (phi, m) for phi8 or phi10
    Figures {
        /// phi8 or phi10
        which: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 301)]
        nphi: usize,
        #[arg(long, default_value_t = 301)]
        nm: usize,
        /// Upper end of the phi axis (default 2 for phi8, 1.6 for phi10)
        #[arg(long)]
        phi_max: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        m_min: f64,
        /// Upper end of the m axis (default 3.5 for phi8, 2.5 for phi10)
        #[arg(long)]
        m_max: Option<f64>,
    },
    /// Lowest eigenvalues of the linearised operator L or its partner L0
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        pair: PairArgs,
        /// L or L0
        #[arg(long, default_value = "L")]
        operator: String,
        #[arg(long, default_value_t = 0.005)]
        dx: f64,
        /// Half-width of the grid (default 30/omega)
        #[arg(long)]
        half_width: Option<f64>,
        /// Number of eigenvalues
        #[arg(long, default_value_t = 4)]
        count: usize,
        /// Add dx/2 and dx/4 grids and extrapolate to dx = 0
        #[arg(long)]
        extrapolate: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve a perturbed kink and track its modulation parameters
    Simulate {
        /// Run configuration with sections [model], [grid], [perturbation], [output]
        config: PathBuf,
        /// Continue from a snapshot written by an earlier run
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Output directory (overrides [output] dir)
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Regenerate the reference classification and threshold table
    Report {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Outcome of a subcommand that ran to completion.
pub enum Status {
    Ok,
    ChecksFailed,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BracketInvalid(_) => 3,
        Error::QuadratureFailure(_)
        | Error::InversionFailure { .. }
        | Error::EigenFailure(_)
        | Error::BlowUp { .. }
        | Error::ModulationFailure(_)
        | Error::Csv { .. } => 4,
        Error::Io { source, .. } if source.kind() != std::io::ErrorKind::NotFound => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("kinklab: cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::dispatch(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("kinklab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
