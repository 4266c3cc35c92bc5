use parsketch_core::CoreError;
use parsketch_fabric::{FabricError, RankFailure};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlgError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Fabric(#[from] FabricError),

    #[error("expected a {expected} distributed matrix, found {found}")]
    WrongRole {
        expected: &'static str,
        found: &'static str,
    },

    #[error("grid {grid} has {grid_size} ranks but the run has {world}")]
    WorldMismatch {
        grid: String,
        grid_size: usize,
        world: usize,
    },

    #[error("{what}: {rows}x{cols} does not split evenly over grid {grid} ({detail})")]
    NonDivisible {
        what: &'static str,
        rows: usize,
        cols: usize,
        grid: String,
        detail: String,
    },

    #[error("distributed shards are inconsistent: {detail}")]
    InconsistentShards { detail: String },

    #[error("layouts carry different per-rank word counts: {src} vs {dst}")]
    WordCountMismatch { src: usize, dst: usize },

    #[error("input must be square for the two-multiply pipeline, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

impl From<AlgError> for RankFailure {
    fn from(e: AlgError) -> Self {
        RankFailure(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AlgError>;
