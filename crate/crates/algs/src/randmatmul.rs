//! Distributed multiply of a block-distributed matrix by a redundantly
//! generated random sketch.
//!
//! Per rank: gather the owned input block over the `k` fiber, generate the
//! matching sketch block locally (no communication), multiply, and
//! reduce-scatter partial results over the `j` fiber. On a `(P, 1, 1)` grid
//! both fibers are singletons and the whole multiply is communication-free.

use parsketch_core::matrix::{gemm, DenseMatrix};
use parsketch_core::rng::{gen_block, SketchSeed};
use parsketch_fabric::{Comm, Group};

use crate::dist::{BlockRole, DistMatrix, Layout};
use crate::error::{AlgError, Result};

pub(crate) struct SketchBlock {
    pub row_start: u64,
    pub row_count: u64,
    pub col_start: u64,
    pub col_count: u64,
    pub total_rows: u64,
}

impl SketchBlock {
    pub(crate) fn generate(&self, seed: SketchSeed) -> Result<DenseMatrix> {
        Ok(gen_block(
            seed,
            self.row_start,
            self.row_count,
            self.col_start,
            self.col_count,
            self.total_rows,
        )?)
    }
}

pub(crate) struct GatheredInput {
    pub block: DenseMatrix,
    pub sketch: SketchBlock,
    pub b_layout: Layout,
}

/// Shared first phase of both algorithms: gather `A`'s block and describe
/// the sketch block this rank multiplies against.
pub(crate) fn gather_input(
    comm: &mut Comm,
    a: &DistMatrix,
    sketch_cols: usize,
    gather_site: &'static str,
) -> Result<GatheredInput> {
    if a.role() != BlockRole::MatA {
        return Err(AlgError::WrongRole {
            expected: BlockRole::MatA.name(),
            found: a.role().name(),
        });
    }
    if a.rank() != comm.rank() {
        return Err(AlgError::InconsistentShards {
            detail: format!("shard of rank {} run on rank {}", a.rank(), comm.rank()),
        });
    }
    let grid = *a.grid();
    if grid.size() != comm.world_size() {
        return Err(AlgError::WorldMismatch {
            grid: grid.to_string(),
            grid_size: grid.size(),
            world: comm.world_size(),
        });
    }
    let a_layout = a.layout()?;
    let b_layout = Layout::new(a.rows(), sketch_cols, &grid, BlockRole::MatB)?;
    let coords = grid.coords_of(comm.rank());
    let [_, p2, p3] = grid.dims();

    let fiber_k = Group::new(grid.fiber(coords, 2))?;
    let gathered = comm.all_gather(gather_site, a.local(), &fiber_k)?;
    let block = DenseMatrix::from_column_major(a_layout.block_rows, a_layout.block_cols, gathered);

    let sketch = SketchBlock {
        row_start: (coords[1] * (a.cols() / p2)) as u64,
        row_count: (a.cols() / p2) as u64,
        col_start: (coords[2] * (sketch_cols / p3)) as u64,
        col_count: (sketch_cols / p3) as u64,
        total_rows: a.cols() as u64,
    };
    Ok(GatheredInput {
        block,
        sketch,
        b_layout,
    })
}

/// Per-rank wall-clock seconds spent in each step of the sketch multiply.
#[derive(Debug, Clone, Copy, Default)]
pub struct SketchPhases {
    pub gather: f64,
    pub generate: f64,
    pub multiply: f64,
    pub reduce: f64,
}

/// `B = A * sketch(seed)`, returned in B-style distribution on `A`'s grid.
pub fn rand_matmul(
    comm: &mut Comm,
    a: &DistMatrix,
    seed: SketchSeed,
    sketch_cols: usize,
) -> Result<DistMatrix> {
    rand_matmul_instrumented(comm, a, seed, sketch_cols).map(|(b, _)| b)
}

/// [`rand_matmul`] plus a wall-clock phase breakdown.
pub fn rand_matmul_instrumented(
    comm: &mut Comm,
    a: &DistMatrix,
    seed: SketchSeed,
    sketch_cols: usize,
) -> Result<(DistMatrix, SketchPhases)> {
    let mut phases = SketchPhases::default();
    let clock = std::time::Instant::now();
    let input = gather_input(comm, a, sketch_cols, "all_gather_a")?;
    phases.gather = clock.elapsed().as_secs_f64();

    let clock = std::time::Instant::now();
    let omega = input.sketch.generate(seed)?;
    phases.generate = clock.elapsed().as_secs_f64();

    let clock = std::time::Instant::now();
    let partial = gemm(&input.block, &omega, false)?;
    drop(omega);
    phases.multiply = clock.elapsed().as_secs_f64();

    let clock = std::time::Instant::now();
    let grid = *a.grid();
    let coords = grid.coords_of(comm.rank());
    let fiber_j = Group::new(grid.fiber(coords, 1))?;
    let local = comm.reduce_scatter("reduce_scatter_b", partial.as_slice(), &fiber_j)?;
    phases.reduce = clock.elapsed().as_secs_f64();
    Ok((
        DistMatrix::from_parts(&input.b_layout, comm.rank(), local),
        phases,
    ))
}
