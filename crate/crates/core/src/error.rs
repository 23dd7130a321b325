use thiserror::Error;

/// Errors surfaced by the solvers and the batch front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("bracket [{lo}, {hi}] does not straddle a sign change")]
    BracketInvalid { lo: f64, hi: f64 },

    #[error("no convergence after {iterations} iterations ({context})")]
    NoConvergence { iterations: usize, context: String },

    #[error("integrand returned a non-finite value at {at}")]
    NonFinite { at: f64 },

    #[error("no solution exists for the requested parameters ({0})")]
    NoSolution(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("missing column for figure {figure}: {column}")]
    MissingColumn { figure: String, column: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
