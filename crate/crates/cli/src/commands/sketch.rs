//! `sketch`: run the distributed sketch multiply, verify against the serial
//! pipeline at desk scale, and emit the phase/cost table.

use std::path::PathBuf;

use clap::Args;
use parsketch_algs::{gather_matrix, rand_matmul_instrumented, scatter_matrix, serial_rand_matmul, BlockRole, SketchPhases};
use parsketch_core::cost::{rand_matmul_grid_valid, select_rand_matmul_grid};
use parsketch_core::io::MatrixFormat;
use parsketch_core::rng::{Distribution, SketchSeed};
use parsketch_core::GridSpec;
use parsketch_fabric::{run_spmd, Backend, RankFailure};

use crate::error::{CliError, Result};
use crate::input::MatrixSource;
use crate::report::{sec, Report};
use crate::{parse_backend, parse_distribution, parse_format, parse_grid, parse_seed};

/// Residual tolerance of the distributed result against the serial
/// pipeline.
const VERIFY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Args)]
pub struct SketchArgs {
    /// Rows of the input matrix (synthetic input).
    #[arg(long)]
    pub n1: Option<usize>,
    /// Columns of the input matrix (synthetic input).
    #[arg(long)]
    pub n2: Option<usize>,
    /// Columns of the random sketch.
    #[arg(short, long)]
    pub r: u64,
    /// Number of ranks.
    #[arg(short = 'P', long, default_value_t = 1)]
    pub procs: u64,
    /// Sketch seed, decimal or 0x-hex.
    #[arg(long, value_parser = parse_seed, default_value = "42")]
    pub seed: u64,
    /// Sketch distribution.
    #[arg(long, value_parser = parse_distribution, default_value = "uniform")]
    pub dist: Distribution,
    #[arg(long, value_parser = parse_backend, default_value = "threaded")]
    pub backend: Backend,
    /// Explicit processor grid p1xp2xp3 (defaults to the cost-optimal one).
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<GridSpec>,
    /// Input matrix file (otherwise synthetic from --n1/--n2).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    pub format: Option<MatrixFormat>,
    /// Seed of the synthetic input matrix.
    #[arg(long, default_value_t = 1)]
    pub a_seed: u64,
    /// Skip serial verification above this many rows.
    #[arg(long, default_value_t = 1024)]
    pub oracle_cutoff: usize,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also dump the raw per-(rank, call) cost report to this path.
    #[arg(long)]
    pub cost_csv: Option<PathBuf>,
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

fn next_multiple(v: u64, m: u64) -> u64 {
    v.div_ceil(m) * m
}

pub(crate) fn ensure_sketch_runnable(n1: u64, n2: u64, r: u64, grid: &GridSpec) -> Result<()> {
    if grid.size() == 0 {
        return Err(CliError::Config("grid has zero ranks".to_string()));
    }
    if rand_matmul_grid_valid(n1, n2, r, grid) {
        return Ok(());
    }
    let [p1, p2, p3] = grid.dims();
    let fiber = (p2 * p3) as u64;
    Err(CliError::Config(format!(
        "sizes ({n1}, {n2}, r={r}) do not split evenly over grid {grid}; nearest sizes that do: \
         n1={}, n2={}, r={}",
        next_multiple(n1, p1 as u64),
        next_multiple(n2, lcm(p2 as u64, fiber)),
        next_multiple(r, lcm(p3 as u64, fiber)),
    )))
}

pub fn run(args: &SketchArgs) -> Result<()> {
    let source = MatrixSource {
        input: args.input.as_ref(),
        format: args.format,
        points: None,
        kernel: None,
        sigma: crate::input::SigmaSpec::Frobenius,
        synthetic_dims: match (args.n1, args.n2) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        },
        synthetic_rank: None,
        synthetic_seed: args.a_seed,
    };
    let (a, source_desc) = source.resolve(false)?;
    let (n1, n2) = (a.rows() as u64, a.cols() as u64);
    if args.r >= n2 {
        return Err(CliError::Config(format!(
            "sketch width r={} must be smaller than the contracted dimension n2={n2}",
            args.r
        )));
    }

    let grid = match args.grid {
        Some(g) => {
            if g.size() as u64 != args.procs {
                return Err(CliError::Config(format!(
                    "grid {g} has {} ranks, -P says {}",
                    g.size(),
                    args.procs
                )));
            }
            g
        }
        None => select_rand_matmul_grid(n1, n2, args.r, args.procs)?,
    };
    ensure_sketch_runnable(n1, n2, args.r, &grid)?;

    let seed = SketchSeed::new(args.seed, args.dist);
    let shards = scatter_matrix(&a, &grid, BlockRole::MatA)?;
    let run = run_spmd(grid.size(), args.backend, |comm| {
        rand_matmul_instrumented(comm, &shards[comm.rank()], seed, args.r as usize)
            .map_err(RankFailure::from)
    })?;
    if let Some(path) = &args.cost_csv {
        std::fs::write(path, run.report.to_csv())
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    let (b_shards, all_phases): (Vec<_>, Vec<SketchPhases>) = run.outputs.into_iter().unzip();
    let phases = all_phases.iter().fold(SketchPhases::default(), |acc, p| SketchPhases {
        gather: acc.gather.max(p.gather),
        generate: acc.generate.max(p.generate),
        multiply: acc.multiply.max(p.multiply),
        reduce: acc.reduce.max(p.reduce),
    });

    let mut report = Report::new("phase,seconds,measured_words,model_words");
    report.meta("command", "sketch");
    report.meta("input", &source_desc);
    report.meta("n1", n1);
    report.meta("n2", n2);
    report.meta("r", args.r);
    report.meta("P", args.procs);
    report.meta("grid", grid);
    report.meta("seed", format!("{} (0x{:x})", args.seed, args.seed));
    report.meta("distribution", args.dist);
    report.meta("backend", args.backend);

    let residual = if a.rows() <= args.oracle_cutoff {
        let b = gather_matrix(&b_shards)?;
        let oracle = serial_rand_matmul(&a, seed, args.r as usize)?;
        Some(oracle.relative_frobenius_distance(&b)?)
    } else {
        None
    };
    match residual {
        Some(v) => report.meta("serial_residual", format!("{v:e}")),
        None => report.meta("serial_residual", "skipped (above oracle cutoff)"),
    }

    let (gather_meas, gather_model) = run.report.site_words(|s| s == "all_gather_a");
    let (reduce_meas, reduce_model) = run.report.site_words(|s| s == "reduce_scatter_b");
    let rows = [
        ("generate_omega", phases.generate, 0, 0),
        ("local_multiply", phases.multiply, 0, 0),
        ("all_gather_a", phases.gather, gather_meas, gather_model),
        ("reduce_scatter_b", phases.reduce, reduce_meas, reduce_model),
    ];
    let mut total = (0.0, 0u64, 0u64);
    for (name, seconds, measured, model) in rows {
        report.row(&[
            name.to_string(),
            sec(seconds),
            measured.to_string(),
            model.to_string(),
        ]);
        total = (total.0 + seconds, total.1 + measured, total.2 + model);
    }
    report.row(&[
        "total".to_string(),
        sec(total.0),
        total.1.to_string(),
        total.2.to_string(),
    ]);
    report.write(args.out.as_deref())?;

    if let Some(v) = residual {
        if v > VERIFY_TOLERANCE {
            return Err(CliError::Verify(format!(
                "distributed result is {v:e} from the serial pipeline (tolerance {VERIFY_TOLERANCE:e})"
            )));
        }
    }
    Ok(())
}
