//! Single-process reference pipeline used to verify the distributed
//! algorithms and by the CLI's residual checks.

use parsketch_core::matrix::gemm;
use parsketch_core::rng::{gen_block, SketchSeed};
use parsketch_core::DenseMatrix;

use crate::error::Result;

/// `A * sketch` with the sketch materialized whole.
pub fn serial_rand_matmul(a: &DenseMatrix, seed: SketchSeed, sketch_cols: usize) -> Result<DenseMatrix> {
    let omega = gen_block(seed, 0, a.cols() as u64, 0, sketch_cols as u64, a.cols() as u64)?;
    Ok(gemm(a, &omega, false)?)
}

/// The full two-multiply pipeline: returns `(B, C)` with `B = A * sketch`
/// and `C = sketch^T * B`.
pub fn serial_nystrom(
    a: &DenseMatrix,
    seed: SketchSeed,
    sketch_cols: usize,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let omega = gen_block(seed, 0, a.rows() as u64, 0, sketch_cols as u64, a.rows() as u64)?;
    let b = gemm(a, &omega, false)?;
    let c = gemm(&omega, &b, true)?;
    Ok((b, c))
}
