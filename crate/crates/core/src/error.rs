use thiserror::Error;

/// Errors raised by the dense kernels, the sketch generator, and the
/// grid/bound calculators.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("{op} requires a non-empty matrix")]
    EmptyInput { op: &'static str },

    #[error("rbf kernel width must be positive, got {sigma}")]
    InvalidSigma { sigma: f64 },

    #[error("requested block rows [{row_start}, {row_end}) exceed the sketch extent of {total_rows} rows")]
    BlockOutOfRange {
        row_start: u64,
        row_end: u64,
        total_rows: u64,
    },

    #[error("{param} must satisfy {requirement} (got {value})")]
    InvalidParameter {
        param: &'static str,
        requirement: &'static str,
        value: u64,
    },

    #[error("grid {dims:?} does not factor the processor count {procs}")]
    GridSizeMismatch { dims: [usize; 3], procs: usize },

    #[error("grid {dims:?} does not evenly divide matrix dimensions {target}")]
    GridDivisibility { dims: [usize; 3], target: String },

    #[error("eigendecomposition did not converge after {sweeps} sweeps (off-diagonal {offdiag:e})")]
    NoConvergence { sweeps: usize, offdiag: f64 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, CoreError>;
