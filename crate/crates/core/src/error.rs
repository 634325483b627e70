use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument fell outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A sampler was configured inconsistently (bad exponent, short mixing budget, ...).
    #[error("invalid sampler configuration: {0}")]
    Sampler(String),

    /// Dense eigensolver failed to converge; the seed identifies the draw.
    #[error("eigensolver failed (seed {seed}): {source}")]
    Eigen {
        seed: u64,
        #[source]
        source: ndarray_linalg::error::LinalgError,
    },

    /// A matrix violated a structural precondition (shape, symmetry, PSD).
    #[error("matrix error: {0}")]
    Matrix(String),

    /// Root finding or quadrature could not reach the requested tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// I/O failure while reading or writing an asset or cache file.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
