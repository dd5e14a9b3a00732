use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid point ({birth}, {death}): {reason}")]
    InvalidPoint {
        birth: f64,
        death: f64,
        reason: &'static str,
    },

    #[error("invalid mass {0}: masses must be finite and nonnegative")]
    InvalidMass(f64),

    #[error("no diagrams")]
    NoDiagrams,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("atom ({birth}, {death}) lies outside the histogram window")]
    OutOfWindow { birth: f64, death: f64 },

    #[error("histogram grids differ")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mass {0} is not an integer multiple of unit mass")]
    NonIntegerMass(f64),

    #[error("support is outside the l1-ball A_L (L = {0})")]
    OutsideSupportBall(f64),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
