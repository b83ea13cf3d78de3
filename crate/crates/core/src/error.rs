use thiserror::Error;

/// Errors raised by the estimators and their inputs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("{what} failed to converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("beta density is infinite at x = {x} (alpha = {alpha}, beta = {beta})")]
    SingularDensity { x: f64, alpha: f64, beta: f64 },

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("sample is degenerate (standard deviation is zero)")]
    DegenerateSample,

    #[error(
        "truncation endpoint {value} lies within 1e-9 of an integer; choose an irrational k (e.g. pi, pi2, pi3)"
    )]
    IntegerCut { value: f64 },

    #[error("truncation window holds {d} support point(s); at least 2 are required")]
    WindowTooNarrow { d: usize },

    #[error("truncation window carries no probability mass")]
    EmptyWindow,

    #[error("{skipped} of {requested} replicates were degenerate (limit is 1%)")]
    TooManySkipped { skipped: usize, requested: usize },

    #[error("covariance diagonal {index} is negative ({value})")]
    NegativeVariance { index: usize, value: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
