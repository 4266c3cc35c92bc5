use parsketch_algs::AlgError;
use parsketch_core::CoreError;
use parsketch_fabric::FabricError;

/// Errors mapped onto the process exit codes: configuration problems exit
/// with 2, numerical verification failures with 3, fabric deadlocks with 4,
/// anything unexpected with 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Verify(String),
    Deadlock(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verify(_) => 3,
            CliError::Deadlock(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Verify(m) => write!(f, "verification failure: {m}"),
            CliError::Deadlock(m) => write!(f, "fabric deadlock: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NoConvergence { .. } => CliError::Verify(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<FabricError> for CliError {
    fn from(e: FabricError) -> Self {
        match e {
            FabricError::Deadlock { detail } => CliError::Deadlock(detail),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<AlgError> for CliError {
    fn from(e: AlgError) -> Self {
        match e {
            AlgError::Core(c) => c.into(),
            AlgError::Fabric(f) => f.into(),
            AlgError::NonDivisible { .. } => CliError::Config(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
