use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("determinant capacity exceeded: {0} spin-orbitals (bitset holds 64)")]
    CapacityExceeded(usize),
    #[error("infeasible model: {0}")]
    Infeasible(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("rationalization failed: {0}")]
    Rationalization(String),
    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
