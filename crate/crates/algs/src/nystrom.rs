//! The two-multiply pipeline `B = A * sketch`, `C = sketch^T * B` over a
//! pair of processor grids, with an all-to-all redistribution of the
//! intermediate when the grids differ.

use parsketch_core::matrix::gemm;
use parsketch_core::rng::SketchSeed;
use parsketch_core::GridSpec;
use parsketch_fabric::{Comm, Group};

use crate::dist::{BlockRole, DistMatrix, Layout};
use crate::error::{AlgError, Result};
use crate::randmatmul::{gather_input, SketchBlock};

#[derive(Debug, Clone, Copy, Default)]
pub struct NystromOptions {
    /// Reuse the first multiply's sketch block for the second multiply when
    /// both grids ask for the identical global sub-block (they do on the
    /// matched 1D layouts). Off by default: the algorithm as written
    /// regenerates, which is what the cost model assumes.
    pub reuse_sketch: bool,
}

/// Per-rank wall-clock seconds in each step of the pipeline; the categories
/// follow the classic breakdown of the two 1D variants (sketch generation,
/// the two local multiplies, the exchange, its unpack, and the final
/// reduction).
#[derive(Debug, Clone, Copy, Default)]
pub struct NystromPhases {
    pub generate_sketch: f64,
    pub first_multiply: f64,
    pub exchange: f64,
    pub unpack: f64,
    pub second_multiply: f64,
    pub reduce_scatter: f64,
}

/// Runs the pipeline on `pi` (taken from `a`) and `psi`. Returns `(B, C)`,
/// both distributed over `psi` in B-style and C-style layouts.
pub fn nystrom(
    comm: &mut Comm,
    a: &DistMatrix,
    seed: SketchSeed,
    sketch_cols: usize,
    psi: &GridSpec,
    options: NystromOptions,
) -> Result<(DistMatrix, DistMatrix)> {
    nystrom_instrumented(comm, a, seed, sketch_cols, psi, options).map(|(b, c, _)| (b, c))
}

/// [`nystrom`] plus a wall-clock phase breakdown.
pub fn nystrom_instrumented(
    comm: &mut Comm,
    a: &DistMatrix,
    seed: SketchSeed,
    sketch_cols: usize,
    psi: &GridSpec,
    options: NystromOptions,
) -> Result<(DistMatrix, DistMatrix, NystromPhases)> {
    if a.rows() != a.cols() {
        return Err(AlgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let pi = *a.grid();
    if psi.size() != pi.size() {
        return Err(AlgError::WorldMismatch {
            grid: psi.to_string(),
            grid_size: psi.size(),
            world: pi.size(),
        });
    }
    let [q1, q2, _] = psi.dims();
    if !n.is_multiple_of(q1) || !sketch_cols.is_multiple_of(q2) {
        // Layout::new reports the B/C-side divisibility failures; the sketch
        // block for the second multiply needs these two on top.
        return Err(AlgError::NonDivisible {
            what: "second-multiply sketch",
            rows: n,
            cols: sketch_cols,
            grid: psi.to_string(),
            detail: format!("sketch block {n}/{q1} x {sketch_cols}/{q2}"),
        });
    }

    let mut phases = NystromPhases::default();

    // First multiply on pi.
    let clock = std::time::Instant::now();
    let input = gather_input(comm, a, sketch_cols, "all_gather_a")?;
    phases.first_multiply += clock.elapsed().as_secs_f64();
    let psi_coords = psi.coords_of(comm.rank());
    let second_sketch = SketchBlock {
        row_start: (psi_coords[0] * (n / q1)) as u64,
        row_count: (n / q1) as u64,
        col_start: (psi_coords[1] * (sketch_cols / q2)) as u64,
        col_count: (sketch_cols / q2) as u64,
        total_rows: n as u64,
    };
    let first = &input.sketch;
    let reusable = options.reuse_sketch
        && (first.row_start, first.row_count, first.col_start, first.col_count)
            == (
                second_sketch.row_start,
                second_sketch.row_count,
                second_sketch.col_start,
                second_sketch.col_count,
            );

    let clock = std::time::Instant::now();
    let omega = input.sketch.generate(seed)?;
    phases.generate_sketch += clock.elapsed().as_secs_f64();
    let clock = std::time::Instant::now();
    let partial = gemm(&input.block, &omega, false)?;
    let kept_omega = if reusable { Some(omega) } else { None };
    drop(input.block);

    let pi_coords = pi.coords_of(comm.rank());
    let fiber_j = Group::new(pi.fiber(pi_coords, 1))?;
    let bhat_local = comm.reduce_scatter("reduce_scatter_bhat", partial.as_slice(), &fiber_j)?;
    let bhat = DistMatrix::from_parts(&input.b_layout, comm.rank(), bhat_local);
    phases.first_multiply += clock.elapsed().as_secs_f64();

    // Layout change between the grids, skipped entirely when they agree.
    let b = if pi == *psi {
        bhat
    } else {
        let (moved, split) = redistribute_inner(comm, &bhat, psi)?;
        phases.exchange = split.exchange;
        phases.unpack = split.unpack;
        moved
    };

    // Second multiply on psi.
    let clock = std::time::Instant::now();
    let b_layout = b.layout()?;
    let fiber_jp = Group::new(psi.fiber(psi_coords, 1))?;
    let gathered = comm.all_gather("all_gather_b", b.local(), &fiber_jp)?;
    let b_block =
        parsketch_core::DenseMatrix::from_column_major(b_layout.block_rows, b_layout.block_cols, gathered);
    phases.second_multiply += clock.elapsed().as_secs_f64();
    let clock = std::time::Instant::now();
    let omega2 = match kept_omega {
        Some(m) => m,
        None => second_sketch.generate(seed)?,
    };
    phases.generate_sketch += clock.elapsed().as_secs_f64();
    let clock = std::time::Instant::now();
    let partial_c = gemm(&omega2, &b_block, true)?;
    drop(omega2);
    drop(b_block);
    phases.second_multiply += clock.elapsed().as_secs_f64();

    let clock = std::time::Instant::now();
    let fiber_ip = Group::new(psi.fiber(psi_coords, 0))?;
    let c_local = comm.reduce_scatter("reduce_scatter_c", partial_c.as_slice(), &fiber_ip)?;
    phases.reduce_scatter = clock.elapsed().as_secs_f64();
    let c_layout = Layout::new(sketch_cols, sketch_cols, psi, BlockRole::MatC)?;
    let c = DistMatrix::from_parts(&c_layout, comm.rank(), c_local);
    Ok((b, c, phases))
}

pub(crate) struct RedistSplit {
    pub exchange: f64,
    pub unpack: f64,
}

/// Moves a B-style distributed matrix from its current grid onto `psi`:
/// pack per-destination chunks (destination-major, each chunk in the
/// destination's column-major order), exchange over the full world, unpack.
pub fn redistribute(comm: &mut Comm, b: &DistMatrix, psi: &GridSpec) -> Result<DistMatrix> {
    redistribute_inner(comm, b, psi).map(|(moved, _)| moved)
}

fn redistribute_inner(
    comm: &mut Comm,
    b: &DistMatrix,
    psi: &GridSpec,
) -> Result<(DistMatrix, RedistSplit)> {
    let mut split = RedistSplit {
        exchange: 0.0,
        unpack: 0.0,
    };
    let src = b.layout()?;
    if *psi == src.grid {
        return Ok((b.clone(), split));
    }
    let dst = Layout::new(b.rows(), b.cols(), psi, BlockRole::MatB)?;
    if src.seg_len != dst.seg_len {
        return Err(AlgError::WordCountMismatch {
            src: src.seg_len,
            dst: dst.seg_len,
        });
    }
    let world = comm.world_size();
    let me = comm.rank();

    let clock = std::time::Instant::now();
    // My elements in local order are also in each destination's local order
    // (both orders are column-major over the same index set), so plain
    // bucketing yields correctly ordered chunks.
    let mut chunks: Vec<Vec<f64>> = (0..world).map(|_| Vec::new()).collect();
    for (offset, &value) in b.local().iter().enumerate() {
        let (row, col) = src.global_of(me, offset);
        let (dest, _) = dst.owner_of(row, col);
        chunks[dest].push(value);
    }

    let received = comm.all_to_all("redistribute", chunks, &Group::world(world))?;
    split.exchange = clock.elapsed().as_secs_f64();
    let clock = std::time::Instant::now();

    let mut cursors = vec![0usize; world];
    let mut local = vec![0.0; dst.seg_len];
    for (offset, slot) in local.iter_mut().enumerate() {
        let (row, col) = dst.global_of(me, offset);
        let (source, _) = src.owner_of(row, col);
        let chunk = &received[source];
        let cursor = &mut cursors[source];
        if *cursor >= chunk.len() {
            return Err(AlgError::InconsistentShards {
                detail: format!("rank {source} sent {} words, needed more", chunk.len()),
            });
        }
        *slot = chunk[*cursor];
        *cursor += 1;
    }
    for (source, (&cursor, chunk)) in cursors.iter().zip(&received).enumerate() {
        if cursor != chunk.len() {
            return Err(AlgError::InconsistentShards {
                detail: format!(
                    "rank {source} sent {} words, only {cursor} were expected",
                    chunk.len()
                ),
            });
        }
    }
    split.unpack = clock.elapsed().as_secs_f64();
    Ok((DistMatrix::from_parts(&dst, me, local), split))
}
