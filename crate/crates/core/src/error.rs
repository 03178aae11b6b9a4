use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Every variant is an invariant violation on the caller's input or a
/// numerical routine failing to reach its stopping criterion.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeuError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{context} must not be empty")]
    Empty { context: &'static str },

    #[error("matrix is not square: row {row} has {found} entries, expected {expected}")]
    NotSquare {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not symmetric: entry ({i},{j}) = {a} but ({j},{i}) = {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },

    #[error("non-finite value {value} at index {index} of {context}")]
    NonFinite {
        context: &'static str,
        index: usize,
        value: f64,
    },

    #[error("negative entry {value} at index {index} of {context}")]
    NegativeEntry {
        context: &'static str,
        index: usize,
        value: f64,
    },

    #[error("{context} is not normalized: got {value}, expected 1")]
    NotNormalized { context: &'static str, value: f64 },

    #[error("basis rows {i} and {j} are not orthonormal: inner product {value}")]
    NotOrthonormal { i: usize, j: usize, value: f64 },

    #[error("embedding column {column} is not a unit vector: norm {norm}")]
    EmbeddingColumn { column: usize, norm: f64 },

    #[error("mixing weight {0} lies outside [0, 1]")]
    InvalidWeight(f64),

    #[error("premium needs two distinct outcomes, got index {0} twice")]
    SameIndex(usize),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("duplicate state label {0:?}")]
    DuplicateState(String),

    #[error(
        "embedded lottery for state {state} has norm {norm}, so its risk profile is unnormalized"
    )]
    UnnormalizedEmbedding { state: usize, norm: f64 },

    #[error("non-spherical mixture: state {state} mixes to a vector of norm {norm}")]
    NonSphericalMixture { state: usize, norm: f64 },

    #[error(
        "Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm})"
    )]
    ConvergenceFailure { sweeps: usize, off_norm: f64 },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid solver parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = PeuError> = std::result::Result<T, E>;
