//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Nyquist guard violated: |xi| * spacing = {0:.6} must be < pi")]
    NyquistViolation(f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("strength profile is negative at cell {index} (value {value})")]
    NegativeStrength { index: usize, value: f64 },
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("argument {0} lies on the branch cut (-inf, 0]*i")]
    BranchViolation(num_complex::Complex64),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("quadrature failed to reach tolerance {tol:.3e} (estimate {estimate:.3e})")]
    QuadratureFailure { tol: f64, estimate: f64 },
    #[error("density has support outside the inner half-box (cell {index}, relative magnitude {magnitude:.3e})")]
    SupportViolation { index: usize, magnitude: f64 },
    #[error("kernel not evaluable: {0}")]
    KernelDomainError(String),
    #[error("Born term index {index} out of range ({len} terms computed)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("power iteration stalled: {0}")]
    PowerIterationStall(String),
    #[error("seed mismatch between ensembles at realization {0}")]
    SeedMismatch(usize),
    #[error("frequency band violation: {0}")]
    BandViolation(String),
    #[error("dimension error: {0}")]
    DimensionError(String),
    #[error("polar samples are not Hermitian-completed: {0}")]
    HermitianViolation(String),
    #[error("empty evaluation grid: {0}")]
    EmptyGrid(String),
    #[error("invalid parameter range: {0}")]
    InvalidRange(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numeric divergence: {0}")]
    Diverged(String),
    #[error("missing artifacts: {0:?}")]
    MissingArtifacts(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
