use thiserror::Error;

/// Errors raised by model construction, simulation, identification and scoring.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("improper model: numerator degree {num} exceeds denominator degree {den}")]
    Improper { num: usize, den: usize },

    #[error("evaluation at a pole near s = {re:.6} {im:+.6}j")]
    AtPole { re: f64, im: f64 },

    #[error("pole on the stability boundary at {re:.6} {im:+.6}j")]
    BoundaryPole { re: f64, im: f64 },

    #[error("H2 norm undefined: {0}")]
    H2Undefined(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("algebraic loop risk: plant has direct feedthrough")]
    AlgebraicLoop,

    #[error("insufficient excitation: condition number {0:.3e}")]
    InsufficientExcitation(f64),

    #[error("interval {h} is not an integer multiple of step {step}")]
    NonCommensurate { h: f64, step: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("frequency grid too coarse near omega = {0:.6e} rad/s")]
    GridTooCoarse(f64),

    #[error("metric ill-defined near this pair (omega = {0:.6e} rad/s)")]
    MetricIllDefined(f64),

    #[error("frequency {omega:.6e} rad/s is at or above the Nyquist limit {limit:.6e} rad/s")]
    AboveNyquist { omega: f64, limit: f64 },

    #[error("unknown preset '{name}'; valid presets: {valid}")]
    UnknownPreset { name: String, valid: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
