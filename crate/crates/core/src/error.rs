use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZenoError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("numerical singularity: {0}")]
    NumericalSingularity(String),
    #[error("degenerate state: {0}")]
    DegenerateState(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("invalid protocol spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, ZenoError>;
