use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the evaluators, geometry engines and quadrature.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("evaluation point {0} coincides with a pole (a zero of E)")]
    PoleHit(Complex64),
    #[error("tail of the zero sequence cannot be certified at {at}: {reason}")]
    TailNotConvergent { at: Complex64, reason: String },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid index {0} for this model")]
    InvalidIndex(i64),
    #[error("no sublevel point found within a search window of radius {radius} around {at}")]
    WindowExhausted { at: Complex64, radius: f64 },
    #[error("dyadic refinement exceeded depth {depth} near x = {x}")]
    ResolutionExceeded { x: f64, depth: usize },
    #[error("point {0} lies outside the covered range")]
    OutOfCoveredRange(Complex64),
    #[error("root bracketing failed: {0}")]
    RootBracketFailure(String),
    #[error("quadrature did not converge: {0}")]
    NonConvergent(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
