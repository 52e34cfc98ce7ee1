use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("quadrature over [{a}, {b}] did not reach tolerance {tolerance:e} within depth {max_depth}")]
    Quadrature {
        a: f64,
        b: f64,
        tolerance: f64,
        max_depth: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate half-width W = {half_width}: the eigenvector at W = 0 or W = 1 is undetermined (A(0) is the zero matrix, A(1) = 2I at d = lambda/2); use a value strictly inside (0, 1)")]
    DegenerateWidth { half_width: f64 },

    #[error("steering limit violated: {0}")]
    SteeringLimit(String),

    #[error("empty interference region with {interferers} interferer(s) configured")]
    EmptyInterferenceRegion { interferers: usize },

    #[error("weight vector is neither symmetric nor skew-symmetric (distances {symmetric:e} / {skew:e})")]
    SymmetryViolation { symmetric: f64, skew: f64 },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
