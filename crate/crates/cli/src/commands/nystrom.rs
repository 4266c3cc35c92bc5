//! `nystrom`: run the two-multiply pipeline under either variant, report the
//! classic six-phase breakdown, and record the reconstruction error at desk
//! scale.

use std::path::PathBuf;

use clap::Args;
use parsketch_algs::{
    gather_matrix, nystrom_instrumented, scatter_matrix, serial_nystrom, BlockRole,
    NystromOptions, NystromPhases,
};
use parsketch_core::cost::{nystrom_grids_valid, select_nystrom_grids, NystromVariant};
use parsketch_core::eigen::nystrom_error;
use parsketch_core::io::MatrixFormat;
use parsketch_core::rng::{Distribution, SketchSeed};
use parsketch_core::GridSpec;
use parsketch_fabric::{run_spmd, Backend, RankFailure};

use crate::error::{CliError, Result};
use crate::input::{KernelKind, MatrixSource, SigmaSpec};
use crate::report::{sec, Report};
use crate::{
    parse_backend, parse_distribution, parse_format, parse_grid, parse_kernel, parse_seed,
    parse_sigma, parse_variant,
};

const VERIFY_TOLERANCE: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Args)]
pub struct NystromArgs {
    /// Matrix dimension (synthetic input).
    #[arg(long)]
    pub n: Option<usize>,
    /// Columns of the random sketch.
    #[arg(short, long)]
    pub r: u64,
    /// Number of ranks.
    #[arg(short = 'P', long, default_value_t = 1)]
    pub procs: u64,
    #[arg(long, value_parser = parse_variant, default_value = "redist")]
    pub variant: NystromVariant,
    #[arg(long, value_parser = parse_seed, default_value = "42")]
    pub seed: u64,
    #[arg(long, value_parser = parse_distribution, default_value = "gaussian")]
    pub dist: Distribution,
    #[arg(long, value_parser = parse_backend, default_value = "threaded")]
    pub backend: Backend,
    /// Explicit first-multiply grid (defaults to the variant's selection).
    #[arg(long, value_parser = parse_grid)]
    pub grid_pi: Option<GridSpec>,
    /// Explicit second-multiply grid.
    #[arg(long, value_parser = parse_grid)]
    pub grid_psi: Option<GridSpec>,
    /// Input matrix file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Point-set file; builds a kernel matrix input.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: Option<KernelKind>,
    /// Kernel width: a number or `frob` for ||X||_F / sqrt(n).
    #[arg(long, value_parser = parse_sigma, default_value = "frob")]
    pub sigma: SigmaSpec,
    #[arg(long, value_parser = parse_format)]
    pub format: Option<MatrixFormat>,
    /// Rank of the synthetic SPSD input.
    #[arg(long)]
    pub synthetic_rank: Option<usize>,
    /// Seed of the synthetic input.
    #[arg(long, default_value_t = 1)]
    pub a_seed: u64,
    /// Skip the symmetry check of the input.
    #[arg(long)]
    pub skip_check: bool,
    /// Reuse the first multiply's sketch block when the second multiply
    /// needs the identical block.
    #[arg(long)]
    pub reuse_sketch: bool,
    /// Eigenvalue cutoff of the core pseudoinverse, relative to the largest
    /// eigenvalue.
    #[arg(long, default_value_t = 1e-12)]
    pub pinv_tol: f64,
    #[arg(long, default_value_t = 1024)]
    pub oracle_cutoff: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also dump the raw per-(rank, call) cost report to this path.
    #[arg(long)]
    pub cost_csv: Option<PathBuf>,
}

pub fn run(args: &NystromArgs) -> Result<()> {
    let source = MatrixSource {
        input: args.input.as_ref(),
        format: args.format,
        points: args.points.as_ref(),
        kernel: args.kernel,
        sigma: args.sigma,
        synthetic_dims: args.n.map(|n| (n, n)),
        synthetic_rank: args.synthetic_rank,
        synthetic_seed: args.a_seed,
    };
    let (a, source_desc) = source.resolve(true)?;
    if a.rows() != a.cols() {
        return Err(CliError::Config(format!(
            "input must be square, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows() as u64;
    if args.r >= n {
        return Err(CliError::Config(format!(
            "sketch width r={} must be smaller than n={n}",
            args.r
        )));
    }
    if !args.skip_check {
        let asym = a.relative_frobenius_distance(&a.transpose())?;
        if asym > SYMMETRY_TOLERANCE {
            return Err(CliError::Config(format!(
                "input is asymmetric ({asym:e} relative); pass --skip-check to proceed anyway"
            )));
        }
    }

    let (pi, psi) = match (args.grid_pi, args.grid_psi) {
        (Some(pi), Some(psi)) => (pi, psi),
        (None, None) => select_nystrom_grids(n, args.r, args.procs, args.variant)?,
        _ => {
            return Err(CliError::Config(
                "pass both --grid-pi and --grid-psi or neither".to_string(),
            ))
        }
    };
    if pi.size() as u64 != args.procs || psi.size() as u64 != args.procs {
        return Err(CliError::Config(format!(
            "grids {pi} / {psi} do not match -P {}",
            args.procs
        )));
    }
    if !nystrom_grids_valid(n, args.r, &pi, &psi) {
        return Err(CliError::Config(format!(
            "sizes (n={n}, r={}) do not split evenly over grids {pi} / {psi}; \
             pick power-of-two sizes or let the tool select the grids",
            args.r
        )));
    }

    let seed = SketchSeed::new(args.seed, args.dist);
    let options = NystromOptions {
        reuse_sketch: args.reuse_sketch,
    };
    let shards = scatter_matrix(&a, &pi, BlockRole::MatA)?;
    let run = run_spmd(pi.size(), args.backend, |comm| {
        nystrom_instrumented(comm, &shards[comm.rank()], seed, args.r as usize, &psi, options)
            .map_err(RankFailure::from)
    })?;
    if let Some(path) = &args.cost_csv {
        std::fs::write(path, run.report.to_csv())
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }

    let mut b_shards = Vec::new();
    let mut c_shards = Vec::new();
    let mut phases = NystromPhases::default();
    for (b, c, p) in run.outputs {
        b_shards.push(b);
        c_shards.push(c);
        phases = NystromPhases {
            generate_sketch: phases.generate_sketch.max(p.generate_sketch),
            first_multiply: phases.first_multiply.max(p.first_multiply),
            exchange: phases.exchange.max(p.exchange),
            unpack: phases.unpack.max(p.unpack),
            second_multiply: phases.second_multiply.max(p.second_multiply),
            reduce_scatter: phases.reduce_scatter.max(p.reduce_scatter),
        };
    }

    let mut report = Report::new("phase,seconds,measured_words,model_words,error");
    report.meta("command", "nystrom");
    report.meta("input", &source_desc);
    report.meta("n", n);
    report.meta("r", args.r);
    report.meta("P", args.procs);
    report.meta("variant", args.variant);
    report.meta("grid_pi", pi);
    report.meta("grid_psi", psi);
    report.meta("seed", format!("{} (0x{:x})", args.seed, args.seed));
    report.meta("distribution", args.dist);
    report.meta("backend", args.backend);
    report.meta("pinv_tol", format!("{:e}", args.pinv_tol));

    // Reconstruction quality and serial verification at desk scale.
    let approx_error = if a.rows() <= args.oracle_cutoff {
        let b = gather_matrix(&b_shards)?;
        let c = gather_matrix(&c_shards)?;
        let (ob, oc) = serial_nystrom(&a, seed, args.r as usize)?;
        let rb = ob.relative_frobenius_distance(&b)?;
        let rc = oc.relative_frobenius_distance(&c)?;
        report.meta("serial_residual_b", format!("{rb:e}"));
        report.meta("serial_residual_c", format!("{rc:e}"));
        if rb > VERIFY_TOLERANCE || rc > VERIFY_TOLERANCE {
            report.write(args.out.as_deref())?;
            return Err(CliError::Verify(format!(
                "distributed results differ from the serial pipeline by ({rb:e}, {rc:e})"
            )));
        }
        Some(nystrom_error(&a, &b, &c, args.pinv_tol)?)
    } else {
        report.meta("serial_residual_b", "skipped (above oracle cutoff)");
        None
    };

    let (fm_meas, fm_model) =
        run.report.site_words(|s| s == "all_gather_a" || s == "reduce_scatter_bhat");
    let (xc_meas, xc_model) = run.report.site_words(|s| s == "redistribute");
    let (sm_meas, sm_model) = run.report.site_words(|s| s == "all_gather_b");
    let (rs_meas, rs_model) = run.report.site_words(|s| s == "reduce_scatter_c");
    let rows = [
        ("generate_omega", phases.generate_sketch, 0, 0),
        ("first_matmul", phases.first_multiply, fm_meas, fm_model),
        ("all_to_all", phases.exchange, xc_meas, xc_model),
        ("unpack", phases.unpack, 0, 0),
        ("second_matmul", phases.second_multiply, sm_meas, sm_model),
        ("reduce_scatter", phases.reduce_scatter, rs_meas, rs_model),
    ];
    let mut total = (0.0, 0u64, 0u64);
    for (name, seconds, measured, model) in rows {
        report.row(&[
            name.to_string(),
            sec(seconds),
            measured.to_string(),
            model.to_string(),
            String::new(),
        ]);
        total = (total.0 + seconds, total.1 + measured, total.2 + model);
    }
    report.row(&[
        "total".to_string(),
        sec(total.0),
        total.1.to_string(),
        total.2.to_string(),
        approx_error.map(|e| format!("{e:e}")).unwrap_or_default(),
    ]);
    report.write(args.out.as_deref())
}
