use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bipartition: n_a={n_a}, n_b={n_b} (need n_a, n_b >= 1 and n_a + n_b <= {cap})")]
    InvalidBipartition { n_a: usize, n_b: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("state is not normalized (deviation {0:e})")]
    NotNormalized(f64),

    #[error("invalid qubit selection: {0}")]
    InvalidSelection(String),

    #[error("condition needs moments up to order {needed}, only {available} available")]
    InsufficientMoments { needed: usize, available: usize },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("sector {charge} out of range [{lo}, {hi}]")]
    SectorOutOfRange { charge: i32, lo: i32, hi: i32 },

    #[error("sector {0} is empty")]
    EmptySector(i32),

    #[error("state is not block diagonal in the total-charge basis (residual {0:e}); symmetrize it first")]
    NotSymmetric(f64),

    #[error("second moment {0} exceeds the first moment squared; D_2 already fails")]
    D2Violated(f64),

    #[error("not enough snapshots: need at least {needed}, got {got}")]
    TooFewSnapshots { needed: usize, got: usize },

    #[error("integration did not converge: {0}")]
    NoConvergence(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 2 for user/config errors, 1 for internal or numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(e) if matches!(e.kind(), std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied) => 2,
            Error::NoConvergence(_) | Error::Io(_) | Error::Csv(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
