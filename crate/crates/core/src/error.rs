use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite sample at node {index} (r = {r})")]
    NonFinite { index: usize, r: f64 },

    #[error("integrand singular at node {index} (r = {r})")]
    Singular { index: usize, r: f64 },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("dimension n = {n} unsupported: {reason}")]
    UnsupportedDimension { n: usize, reason: &'static str },

    #[error("invalid pressure shape: {0}")]
    InvalidShape(String),

    #[error("no positive root for the profile scale: {0}")]
    Bracket(String),

    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("time {t} outside solution horizon [{start}, {end}]")]
    OutsideHorizon { t: f64, start: f64, end: f64 },

    #[error("insufficient domain: {0}")]
    InsufficientDomain(String),

    #[error("divergent tail integral: {0}")]
    DivergentTail(String),

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("velocity field undefined at particle {index} (t = {t})")]
    FieldDomain { index: usize, t: f64 },

    #[error("positivity lost in cell {cell} at t = {t}")]
    Positivity { cell: usize, t: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
