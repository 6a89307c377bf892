use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),
    #[error("invalid membership: {0}")]
    InvalidMembership(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("singular design: {0}")]
    SingularDesign(String),
    #[error("infeasible constraints: {0}")]
    Infeasible(String),
    #[error("enumeration would visit ~{estimated:.3e} states, over the limit {limit:.3e}")]
    LimitsExceeded { estimated: f64, limit: f64 },
    #[error("invalid graphon spec: {0}")]
    InvalidSpec(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("file format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
