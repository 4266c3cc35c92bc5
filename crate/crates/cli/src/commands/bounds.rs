//! `bounds`: lower bounds, selected grids and predicted costs over a sweep
//! of processor counts.

use std::path::PathBuf;

use clap::Args;
use parsketch_core::bounds::{nystrom_bound, rand_matmul_bound};
use parsketch_core::cost::{
    nystrom_grids_divide, nystrom_model_words, rand_matmul_grid_divides, rand_matmul_model_words,
    select_nystrom_grids, select_rand_matmul_grid, NystromVariant,
};

use crate::error::{CliError, Result};
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundsMode {
    RandMatmul,
    Nystrom,
}

fn parse_mode(s: &str) -> std::result::Result<BoundsMode, String> {
    match s {
        "randmatmul" | "sketch" => Ok(BoundsMode::RandMatmul),
        "nystrom" => Ok(BoundsMode::Nystrom),
        other => Err(format!("unknown mode `{other}` (expected randmatmul or nystrom)")),
    }
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_parser = parse_mode, default_value = "randmatmul")]
    pub mode: BoundsMode,
    /// Rows of the input (randmatmul mode).
    #[arg(long)]
    pub n1: Option<u64>,
    /// Columns of the input (randmatmul mode).
    #[arg(long)]
    pub n2: Option<u64>,
    /// Matrix dimension (nystrom mode).
    #[arg(long)]
    pub n: Option<u64>,
    /// Columns of the random sketch.
    #[arg(short, long)]
    pub r: u64,
    /// Explicit processor counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p_list: Vec<u64>,
    /// Sweep P over powers of two up to this value (inclusive).
    #[arg(long)]
    pub p_pow2_max: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn sweep(args: &BoundsArgs) -> Result<Vec<u64>> {
    let mut ps = args.p_list.clone();
    if let Some(max) = args.p_pow2_max {
        let mut p = 1;
        while p <= max {
            ps.push(p);
            p *= 2;
        }
    }
    ps.sort_unstable();
    ps.dedup();
    if ps.is_empty() {
        return Err(CliError::Config(
            "empty sweep: pass --p-list or --p-pow2-max".to_string(),
        ));
    }
    if ps.contains(&0) {
        return Err(CliError::Config("P must be positive".to_string()));
    }
    Ok(ps)
}

pub fn run(args: &BoundsArgs) -> Result<()> {
    let ps = sweep(args)?;
    match args.mode {
        BoundsMode::RandMatmul => {
            let (n1, n2) = match (args.n1, args.n2) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(CliError::Config(
                        "randmatmul mode needs --n1 and --n2".to_string(),
                    ))
                }
            };
            let mut report = Report::new("n1,n2,r,P,case,W,predicted,gap");
            report.meta("command", "bounds randmatmul");
            for &p in &ps {
                let bound = rand_matmul_bound(n1, n2, args.r, p)?;
                let grid = select_rand_matmul_grid(n1, n2, args.r, p)?;
                // Model words of the selected grid; meaningful as a word
                // count only when the grid divides the extents, so flag it.
                let predicted = rand_matmul_model_words(n1, n2, args.r, &grid);
                let divisible = rand_matmul_grid_divides(n1, n2, args.r, &grid);
                if !divisible {
                    report.meta(
                        &format!("P={p}"),
                        format!("selected grid {grid} does not divide the extents; cost is the real-valued model"),
                    );
                }
                report.row(&[
                    n1.to_string(),
                    n2.to_string(),
                    args.r.to_string(),
                    p.to_string(),
                    bound.case.index().to_string(),
                    format!("{}", bound.words),
                    format!("{predicted}"),
                    format!("{}", predicted - bound.words),
                ]);
            }
            report.write(args.out.as_deref())
        }
        BoundsMode::Nystrom => {
            let n = args.n.ok_or_else(|| {
                CliError::Config("nystrom mode needs --n".to_string())
            })?;
            let mut report = Report::new("n1,n2,r,P,case,W,predicted,gap,variant");
            report.meta("command", "bounds nystrom");
            for &p in &ps {
                let bound = nystrom_bound(n, args.r, p)?;
                for variant in [NystromVariant::Redist, NystromVariant::NoRedist] {
                    let (pi, psi) = select_nystrom_grids(n, args.r, p, variant)?;
                    let predicted = nystrom_model_words(n, args.r, &pi, &psi);
                    if !nystrom_grids_divide(n, args.r, &pi, &psi) {
                        report.meta(
                            &format!("P={p} {variant}"),
                            format!("grids {pi}/{psi} do not divide the extents; cost is the real-valued model"),
                        );
                    }
                    report.row(&[
                        n.to_string(),
                        n.to_string(),
                        args.r.to_string(),
                        p.to_string(),
                        bound.case.index().to_string(),
                        format!("{}", bound.words),
                        format!("{predicted}"),
                        format!("{}", predicted - bound.words),
                        variant.to_string(),
                    ]);
                }
            }
            report.write(args.out.as_deref())
        }
    }
}
