use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two directions are equal or antipodal, so their planes share no unique line.
    #[error("directions are equal or antipodal (angular separation {separation:.3e} rad)")]
    AntipodalOrEqual { separation: f64 },

    #[error("pair ({i}, {j}) is degenerate: {source}")]
    DegeneratePair {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("expected a unit vector, got norm {norm}")]
    NonUnit { norm: f64 },

    #[error("malformed datum at pair ({i}, {j}): {reason}")]
    MalformedDatum { i: usize, j: usize, reason: String },

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge after {iterations} iterations (off-diagonal norm {off_diagonal_norm:.3e})")]
    Convergence {
        iterations: usize,
        off_diagonal_norm: f64,
    },

    #[error("quadrature not self-consistent: {coarse} at base resolution vs {fine} doubled")]
    Quadrature { coarse: String, fine: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
