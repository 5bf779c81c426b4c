//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KvnError {
    /// A trajectory left the bounding box during integration.
    #[error("state escaped the bounding box at t = {time}: {state:?}")]
    DomainEscape { time: f64, state: Vec<f64> },

    /// Rejection sampling acceptance rate dropped below the abort threshold.
    #[error("acceptance rate {rate:.3e} below 1e-4 after {proposals} proposals")]
    DegenerateDomain { rate: f64, proposals: u64 },

    /// Invalid configuration or violated precondition.
    #[error("configuration error: {0}")]
    Config(String),

    /// A basis or generator evaluation produced a non-finite value.
    #[error("non-finite value in column of sample {sample}")]
    NonFinite { sample: usize },

    /// Every Gram eigenvalue fell below the truncation threshold.
    #[error("all Gram eigenvalues truncated; effective rank is zero")]
    RankZero,

    /// Quadrature grid contains no interior nodes.
    #[error("quadrature grid {grid} per dim produced zero interior nodes")]
    EmptyQuadrature { grid: usize },

    /// Least-squares system is rank deficient beyond the requested tolerance.
    #[error("rank deficient fit: rank {rank} < dimension {dim}")]
    RankDeficient { rank: usize, dim: usize },

    /// Malformed archive file.
    #[error("archive parse error at byte {offset}: {reason}")]
    Parse { offset: u64, reason: String },

    /// Archive written by an incompatible version.
    #[error("archive version {found} does not match expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    /// No permutation brings the matrix to the expected block pattern.
    #[error("no 2+4 block-arrowhead structure found within tolerance {tolerance:.3e}")]
    StructureNotFound { tolerance: f64 },

    /// Residual denominator v*Gv is not positive.
    #[error("residual score undefined: v*Gv = {value:.3e} is not positive")]
    UndefinedScore { value: f64 },

    /// Dense eigensolver failed to converge.
    #[error("eigensolver failed to converge ({iterations} iterations)")]
    NonConvergence { iterations: i32 },

    /// Skew-symmetry (or another structural requirement) violated on input.
    #[error("matrix structure rejected: {0}")]
    StructureViolation(String),

    /// Gate refers to a qubit outside the register.
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    /// Wrapped LAPACK error.
    #[error("linear algebra backend error: {0}")]
    Linalg(String),
}

impl From<ndarray_linalg::error::LinalgError> for KvnError {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        match e {
            ndarray_linalg::error::LinalgError::Lapack(
                lax::error::Error::LapackComputationalFailure { return_code },
            ) => KvnError::NonConvergence { iterations: return_code },
            other => KvnError::Linalg(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, KvnError>;
