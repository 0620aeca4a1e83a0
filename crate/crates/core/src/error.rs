use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type in use.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("root not bracketed: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    BracketSign { f_lo: f64, f_hi: f64 },

    #[error("quadrature did not converge after {refinements} refinements (estimate {estimate}, error bound {error_bound})")]
    QuadratureNonConvergence {
        estimate: f64,
        error_bound: f64,
        refinements: usize,
    },

    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("degenerate conditioning: F_{bidder}({value}) = 0")]
    DegenerateConditioning { bidder: usize, value: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("unsupported instance: {0}")]
    Unsupported(String),

    #[error("solver did not converge: {0}")]
    SolverNonConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
