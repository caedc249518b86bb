use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid noise spec: {0}")]
    InvalidNoiseSpec(String),

    #[error("noise spec has no usable noise source")]
    NoNoiseSource,

    #[error("need at least {needed} PSD points, got {got}")]
    TooFewPsdPoints { needed: usize, got: usize },

    #[error("no positive combination of noise components fits the PSD points")]
    FitFailed,

    #[error("invalid autocovariance: {0}")]
    InvalidAutocovariance(String),

    #[error("autocovariance has {got} lags, need at least {needed}")]
    NotEnoughLags { got: usize, needed: usize },

    #[error("sample index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("degenerate covariance: Q'R_nn Q = {0:e}")]
    DegenerateCovariance(f64),

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("rest window covers {got} samples, need at least {needed}")]
    RestWindowTooShort { got: usize, needed: usize },

    #[error("trace bias must be removed before integration")]
    BiasNotRemoved,

    #[error(
        "no end of shaking found: no quiet window of {window_samples} samples below {delta:e} m/s²"
    )]
    NoEosFound { delta: f64, window_samples: usize },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("floor height must be positive, got {0}")]
    NonPositiveHeight(f64),

    #[error("peak displacement must be non-negative, got {0}")]
    NegativeDisplacement(f64),

    #[error("invalid drift thresholds: {0}")]
    InvalidThresholds(String),

    #[error("invalid displacement model: {0}")]
    InvalidModel(String),

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    QuadratureNotConverged { achieved: f64, requested: f64 },

    #[error("duration distribution is empty")]
    EmptyDistribution,

    #[error("invalid duration distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid duration grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown sensor `{0}`")]
    UnknownSensor(String),

    #[error("unknown hazard level `{0}`")]
    UnknownHazard(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
