//! `kernel`: build a kernel matrix from a point-set file and write it in the
//! toolkit's matrix formats.

use std::path::PathBuf;

use clap::Args;
use parsketch_core::io::{write_matrix, MatrixFormat};

use crate::error::Result;
use crate::input::{build_kernel, load_matrix, KernelKind, SigmaSpec};
use crate::{parse_format, parse_kernel, parse_sigma};

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Point-set file, one point per row.
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: KernelKind,
    /// Kernel width: a number or `frob` for ||X||_F / sqrt(n).
    #[arg(long, value_parser = parse_sigma, default_value = "frob")]
    pub sigma: SigmaSpec,
    /// Format of the points file (guessed from the extension by default).
    #[arg(long, value_parser = parse_format)]
    pub format: Option<MatrixFormat>,
    /// Output matrix file.
    #[arg(long)]
    pub out: PathBuf,
    /// Output format (guessed from the extension by default).
    #[arg(long, value_parser = parse_format)]
    pub out_format: Option<MatrixFormat>,
}

pub fn run(args: &KernelArgs) -> Result<()> {
    let points = load_matrix(&args.points, args.format)?;
    let kernel = build_kernel(&points, args.kernel, args.sigma)?;
    let format = args
        .out_format
        .unwrap_or_else(|| MatrixFormat::from_path(&args.out));
    write_matrix(&args.out, &kernel, format)?;
    Ok(())
}
