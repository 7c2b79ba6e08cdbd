use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A physical parameter violates its admissibility constraint.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// Evaluation requested outside the domain of a map or potential.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid error: {0}")]
    Grid(String),

    /// Finite-difference stencil would cross the origin.
    #[error("step error: {0}")]
    Step(String),

    #[error("non-finite value in field at node {0}")]
    NonFinite(usize),

    #[error("zero denominator: {0}")]
    ZeroDenominator(String),

    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    NoConvergence { iterations: usize, gradient_norm: f64 },

    #[error("bad mountain-pass endpoint: J(e) = {0:.6e} is not negative")]
    BadEndpoint(f64),

    #[error("not a signed axis permutation: {0}")]
    BadPermutation(String),

    #[error("field is not a converged critical point (gradient norm {0:.3e})")]
    NotConverged(f64),

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
