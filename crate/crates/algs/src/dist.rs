//! Block distributions of a dense matrix over a 3D processor grid.
//!
//! Each role tiles the matrix into a 2D grid of blocks and splits every
//! block into equal contiguous column-major segments across the remaining
//! grid axis (the fiber). Exactly one copy of every global element exists
//! across the ranks, and a rank's piece is always one contiguous segment of
//! one block.

use parsketch_core::{DenseMatrix, GridSpec};

use crate::error::{AlgError, Result};

/// How a matrix maps onto the grid axes.
///
/// * `MatA`: blocks over `(i, j)`, each split across the `k` fiber.
/// * `MatB`: blocks over `(i, k)`, each split across the `j` fiber.
/// * `MatC`: blocks over `(j, k)`, each split across the `i` fiber.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockRole {
    MatA,
    MatB,
    MatC,
}

impl BlockRole {
    pub fn name(self) -> &'static str {
        match self {
            BlockRole::MatA => "A-style",
            BlockRole::MatB => "B-style",
            BlockRole::MatC => "C-style",
        }
    }

    /// Grid axes used as (block-row, block-col, fiber).
    fn axes(self) -> (usize, usize, usize) {
        match self {
            BlockRole::MatA => (0, 1, 2),
            BlockRole::MatB => (0, 2, 1),
            BlockRole::MatC => (1, 2, 0),
        }
    }
}

/// Resolved geometry of one (matrix, grid, role) combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Layout {
    pub rows: usize,
    pub cols: usize,
    pub grid: GridSpec,
    pub role: BlockRole,
    /// Block shape.
    pub block_rows: usize,
    pub block_cols: usize,
    /// Fiber size each block is split across.
    pub split: usize,
    /// Words per rank.
    pub seg_len: usize,
}

impl Layout {
    pub fn new(rows: usize, cols: usize, grid: &GridSpec, role: BlockRole) -> Result<Layout> {
        let dims = grid.dims();
        let (row_axis, col_axis, fiber_axis) = role.axes();
        let (row_div, col_div, split) = (dims[row_axis], dims[col_axis], dims[fiber_axis]);
        let fail = |detail: String| AlgError::NonDivisible {
            what: role.name(),
            rows,
            cols,
            grid: grid.to_string(),
            detail,
        };
        if !rows.is_multiple_of(row_div) {
            return Err(fail(format!("{rows} rows over {row_div} block rows")));
        }
        if !cols.is_multiple_of(col_div) {
            return Err(fail(format!("{cols} columns over {col_div} block columns")));
        }
        let block_rows = rows / row_div;
        let block_cols = cols / col_div;
        let block_words = block_rows * block_cols;
        if !block_words.is_multiple_of(split) {
            return Err(fail(format!(
                "{block_rows}x{block_cols} blocks over a fiber of {split}"
            )));
        }
        Ok(Layout {
            rows,
            cols,
            grid: *grid,
            role,
            block_rows,
            block_cols,
            split,
            seg_len: block_words / split,
        })
    }

    /// `(block_row, block_col, segment)` owned by `rank`.
    fn placement(&self, rank: usize) -> (usize, usize, usize) {
        let coords = self.grid.coords_of(rank);
        let (row_axis, col_axis, fiber_axis) = self.role.axes();
        (coords[row_axis], coords[col_axis], coords[fiber_axis])
    }

    /// Owner rank and local offset of global element `(row, col)`.
    pub fn owner_of(&self, row: usize, col: usize) -> (usize, usize) {
        let (row_axis, col_axis, fiber_axis) = self.role.axes();
        let flat = (col % self.block_cols) * self.block_rows + (row % self.block_rows);
        let mut coords = [0usize; 3];
        coords[row_axis] = row / self.block_rows;
        coords[col_axis] = col / self.block_cols;
        coords[fiber_axis] = flat / self.seg_len;
        (self.grid.rank_of(coords), flat % self.seg_len)
    }

    /// Global element at `rank`'s local `offset`.
    pub fn global_of(&self, rank: usize, offset: usize) -> (usize, usize) {
        let (bi, bj, seg) = self.placement(rank);
        let flat = seg * self.seg_len + offset;
        let row = bi * self.block_rows + flat % self.block_rows;
        let col = bj * self.block_cols + flat / self.block_rows;
        (row, col)
    }
}

/// One rank's piece of a block-distributed matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistMatrix {
    rows: usize,
    cols: usize,
    grid: GridSpec,
    role: BlockRole,
    rank: usize,
    local: Vec<f64>,
}

impl DistMatrix {
    pub(crate) fn from_parts(layout: &Layout, rank: usize, local: Vec<f64>) -> DistMatrix {
        debug_assert_eq!(local.len(), layout.seg_len);
        DistMatrix {
            rows: layout.rows,
            cols: layout.cols,
            grid: layout.grid,
            role: layout.role,
            rank,
            local,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn role(&self) -> BlockRole {
        self.role
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The rank-local contiguous column-major segment of its block.
    pub fn local(&self) -> &[f64] {
        &self.local
    }

    pub(crate) fn layout(&self) -> Result<Layout> {
        Layout::new(self.rows, self.cols, &self.grid, self.role)
    }
}

/// Splits `global` into one shard per rank (index = rank). The shards
/// together hold exactly one copy of the matrix.
pub fn scatter_matrix(
    global: &DenseMatrix,
    grid: &GridSpec,
    role: BlockRole,
) -> Result<Vec<DistMatrix>> {
    let layout = Layout::new(global.rows(), global.cols(), grid, role)?;
    let mut shards = Vec::with_capacity(grid.size());
    for rank in 0..grid.size() {
        let mut local = Vec::with_capacity(layout.seg_len);
        for offset in 0..layout.seg_len {
            let (row, col) = layout.global_of(rank, offset);
            local.push(global.get(row, col));
        }
        shards.push(DistMatrix::from_parts(&layout, rank, local));
    }
    Ok(shards)
}

/// Reassembles a full matrix from one shard per rank. Verification-only: the
/// distributed algorithms never call this, so it contributes no traffic to
/// any cost report.
pub fn gather_matrix(shards: &[DistMatrix]) -> Result<DenseMatrix> {
    let first = shards.first().ok_or_else(|| AlgError::InconsistentShards {
        detail: "no shards".to_string(),
    })?;
    let layout = first.layout()?;
    if shards.len() != first.grid.size() {
        return Err(AlgError::InconsistentShards {
            detail: format!(
                "{} shards for a grid of {}",
                shards.len(),
                first.grid.size()
            ),
        });
    }
    let mut out = DenseMatrix::zeros(first.rows, first.cols);
    for (idx, shard) in shards.iter().enumerate() {
        if shard.rank != idx
            || shard.grid != first.grid
            || shard.role != first.role
            || shard.rows != first.rows
            || shard.cols != first.cols
        {
            return Err(AlgError::InconsistentShards {
                detail: format!("shard {idx} does not match shard 0"),
            });
        }
        for (offset, &v) in shard.local.iter().enumerate() {
            let (row, col) = layout.global_of(idx, offset);
            out.set(row, col, v);
        }
    }
    Ok(out)
}
