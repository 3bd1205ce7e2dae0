//! Crate-wide error type.

/// Errors raised by simulation, audit, and bound-checking operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("enumeration budget exceeded: {0}")]
    EnumerationCap(String),
    #[error("support violation: weight outside support = {0:.3e}")]
    SupportViolation(f64),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("eigensolver failed to converge after {0} sweeps")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
