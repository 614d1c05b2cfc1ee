use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({x}, {y}) is not in the upper half-plane")]
    NotInHalfPlane { x: f64, y: f64 },

    #[error("degenerate isometry matrix (determinant {0})")]
    DegenerateIsometry(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scheme fails validation: {0}")]
    InvalidScheme(String),

    #[error("ball radius {radius} is too small, need at least {needed}")]
    RadiusTooSmall { radius: u32, needed: u32 },

    #[error("size guard: {requested} vertices exceeds the cap of {cap}")]
    TooLarge { requested: u64, cap: u64 },

    #[error("root not bracketed on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("inconsistent coloring: {0}")]
    InconsistentColoring(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
