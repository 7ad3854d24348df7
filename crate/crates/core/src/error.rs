use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("infeasible beam assignment for UE {ue}: {reason}")]
    InfeasibleAssignment { ue: usize, reason: String },

    #[error("search space too large: {size} candidates exceeds cap {cap}")]
    Capacity { size: u128, cap: u128 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("drop {drop}: {source}")]
    Drop {
        drop: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalDomain(msg.into())
    }

    /// Short category label used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NumericalDomain(_) => "numerical-domain",
            Error::InfeasibleAssignment { .. } => "infeasible-assignment",
            Error::Capacity { .. } => "capacity",
            Error::Config(_) => "config",
            Error::Drop { source, .. } => source.category(),
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => "io",
        }
    }

    /// Process exit code for the CLI, one per category.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "invalid-argument" => 2,
            "numerical-domain" => 3,
            "infeasible-assignment" => 4,
            "capacity" => 5,
            "config" => 6,
            _ => 7,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
