//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid parameters or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two particles came closer than the validity range of the potential
    /// table. The microscopic model is no longer meaningful at this state.
    #[error("model breakdown: particles {i} and {j} at distance {distance:.6e} (minimum {r_min:.6e})")]
    ModelBreakdown {
        i: usize,
        j: usize,
        distance: f64,
        r_min: f64,
    },

    /// A profile had no monotone interface run covering the two phase levels.
    #[error("no interface: {0}")]
    NoInterface(String),

    /// An iterative solver did not converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// Melt criterion not reached within the step budget.
    #[error("melt criterion not reached after {rounds} rounds: first-minimum/first-peak ratio {ratio:.3} < {threshold:.3}")]
    MeltNotReached {
        rounds: u32,
        ratio: f64,
        threshold: f64,
    },

    /// A structured file failed an integrity check (truncation, field counts).
    #[error("corrupt file {path}: {reason}")]
    Integrity { path: String, reason: String },

    /// A versioned block carried an unsupported version tag.
    #[error("unsupported version in {path}: found {found:?}, expected {expected:?}")]
    UnsupportedVersion {
        path: String,
        found: String,
        expected: String,
    },

    /// Text input that could not be parsed, with a 1-based line number.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of input validation rather than runtime state.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Config(_) | Error::Parse { .. }
        )
    }
}
