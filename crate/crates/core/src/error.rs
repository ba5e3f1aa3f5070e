use thiserror::Error;

/// Errors raised by the simulator and its numeric layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is numerically singular (pivot ratio {ratio:e})")]
    Singular { ratio: f64 },

    #[error("matrix is not Hermitian within tolerance (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("non-finite entry in matrix input")]
    NonFinite,

    #[error(
        "infeasible outage target {target}: must lie in the open interval ({lower}, 1) at linear SNR {rho}"
    )]
    InfeasibleTarget { target: f64, lower: f64, rho: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("{resampled} singular realizations out of {trials} trials exceeds the 0.1% budget")]
    ExcessiveResamples { resampled: u64, trials: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
