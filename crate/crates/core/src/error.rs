use thiserror::Error;

/// Errors produced by the solver, the noise model and the verification suites.
#[derive(Debug, Error)]
pub enum SnsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("Yosida level must be positive")]
    ZeroYosidaLevel,

    #[error("integrability exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),

    #[error("gamma-radonifying norm only supports p in {{2, 4}}, got {0}")]
    UnsupportedGammaExponent(f64),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("field is not band-limited to |k_i| <= {limit}")]
    BandLimitViolated { limit: usize },

    #[error("moment order must be even and >= 2, got {0}")]
    InvalidMoment(u32),

    #[error("unknown inequality id `{0}`")]
    UnknownInequality(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical abort at step {step}: {quantity} = {value}")]
    NumericalAbort {
        step: usize,
        quantity: String,
        value: f64,
    },

    #[error("malformed SNSF container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SnsError>;
