use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or inputs; the message names the failed condition.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    /// Reachable height touched the top of the lattice window.
    #[error("percolation overflow: reachable height reached window top {height}")]
    Overflow { height: usize },

    /// A derived parameter set violates one of its defining inequalities.
    #[error("inconsistent parameters: {0}")]
    Inconsistent(String),

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("non-finite state after step {step}")]
    BlowUp { step: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}
