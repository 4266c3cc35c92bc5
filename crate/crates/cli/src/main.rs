//! Benchmark driver for the sketching toolkit: build or load matrices, run
//! the distributed algorithms under a chosen backend and grid, and emit cost
//! and error tables.

mod commands;
mod error;
mod input;
mod report;

use clap::{Parser, Subcommand};
use parsketch_core::cost::NystromVariant;
use parsketch_core::io::MatrixFormat;
use parsketch_core::rng::Distribution;
use parsketch_core::GridSpec;
use parsketch_fabric::Backend;

use crate::input::{KernelKind, SigmaSpec};

pub(crate) fn parse_seed(s: &str) -> Result<u64, String> {
    if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).map_err(|e| format!("invalid hex seed `{s}`: {e}"))
    } else {
        s.parse().map_err(|e| format!("invalid seed `{s}`: {e}"))
    }
}

pub(crate) fn parse_distribution(s: &str) -> Result<Distribution, String> {
    s.parse()
}

pub(crate) fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse()
}

pub(crate) fn parse_grid(s: &str) -> Result<GridSpec, String> {
    s.parse()
}

pub(crate) fn parse_format(s: &str) -> Result<MatrixFormat, String> {
    s.parse()
}

pub(crate) fn parse_variant(s: &str) -> Result<NystromVariant, String> {
    s.parse()
}

pub(crate) fn parse_kernel(s: &str) -> Result<KernelKind, String> {
    s.parse()
}

pub(crate) fn parse_sigma(s: &str) -> Result<SigmaSpec, String> {
    s.parse()
}

#[derive(Parser)]
#[command(
    name = "parsketch",
    version,
    about = "Distributed sketching and low-rank approximation with word-exact cost accounting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multiply a matrix by a generated random sketch and report costs.
    Sketch(commands::sketch::SketchArgs),
    /// Run the two-multiply pipeline and report costs and errors.
    Nystrom(commands::nystrom::NystromArgs),
    /// Print lower bounds, selected grids and predicted costs for a sweep.
    Bounds(commands::bounds::BoundsArgs),
    /// Build a kernel matrix from a point-set file.
    Kernel(commands::kernel::KernelArgs),
}

fn main() -> std::process::ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Sketch(args) => commands::sketch::run(args),
        Command::Nystrom(args) => commands::nystrom::run(args),
        Command::Bounds(args) => commands::bounds::run(args),
        Command::Kernel(args) => commands::kernel::run(args),
    };
    match outcome {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            std::process::ExitCode::from(e.exit_code())
        }
    }
}
