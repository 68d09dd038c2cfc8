use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("generator parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("unsupported trellis: {0}")]
    UnsupportedTrellis(String),

    #[error("memory {0} exceeds the subspace enumeration cap of 4")]
    MemoryCap(usize),

    #[error("invalid probability vector: {0}")]
    InvalidProbs(String),

    #[error("{what} did not converge after {iterations} iterations (last change {last_change:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        last_change: f64,
    },

    #[error("quadrature did not converge on [{a}, {b}] after {levels} refinement levels")]
    Quadrature { a: f64, b: f64, levels: usize },

    #[error("threshold predicates disagree at eps = {eps}: {detail}")]
    PredicateDisagreement { eps: f64, detail: String },

    #[error("non-monotone verdict trace: {0}")]
    NonMonotoneTrace(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
