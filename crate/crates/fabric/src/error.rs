use thiserror::Error;

#[derive(Debug, Error)]
pub enum FabricError {
    #[error("invalid group: {reason}")]
    InvalidGroup { reason: String },

    #[error("rank {rank} invoked {site} on a group it does not belong to")]
    CallerNotInGroup { site: &'static str, rank: usize },

    #[error("{site}: geometry mismatch across group members: {detail}")]
    GeometryMismatch { site: &'static str, detail: String },

    #[error("{site}: buffer of {len} words is not divisible by the group size {group}")]
    NonDivisibleBuffer {
        site: &'static str,
        len: usize,
        group: usize,
    },

    #[error("{site}: got {got} chunks for a group of {expected}")]
    ChunkCount {
        site: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("deadlock: {detail}")]
    Deadlock { detail: String },

    #[error("{site}: peer rank {peer} disconnected mid-collective")]
    PeerDisconnected { site: &'static str, peer: usize },

    #[error("rank {rank} failed: {message}")]
    RankFailed { rank: usize, message: String },

    #[error("rank {rank} panicked")]
    RankPanicked { rank: usize },

    #[error("world size must be at least 1")]
    EmptyWorld,
}

/// Error type rank programs report; collected by the runner into a
/// [`FabricError::RankFailed`] naming the rank.
#[derive(Debug)]
pub struct RankFailure(pub String);

impl std::fmt::Display for RankFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl From<FabricError> for RankFailure {
    fn from(e: FabricError) -> Self {
        RankFailure(e.to_string())
    }
}

impl From<String> for RankFailure {
    fn from(message: String) -> Self {
        RankFailure(message)
    }
}

pub type Result<T> = std::result::Result<T, FabricError>;
