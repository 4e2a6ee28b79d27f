//! Crate-wide error type.
//!
//! Degenerate inputs are reported, never silently regularized: a singular
//! network, an unexcited estimation window, or a malformed scenario config
//! each surface as a distinct variant so callers (and the CLI exit-code
//! mapping) can tell configuration mistakes from runtime failures.

use thiserror::Error;

/// Errors produced by scenario construction, solvers, and the run harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A scenario, measurement set, or estimator input violates its contract.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Scenario configuration text failed to parse or validate.
    #[error("config error: {0}")]
    Config(String),

    /// A linear system or estimation window is singular or too
    /// ill-conditioned to invert meaningfully.
    #[error("singular system: {0}")]
    Singular(String),

    /// An iterative solver exhausted its budget without converging.
    #[error("did not converge: {0}")]
    NoConvergence(String),

    /// Reading or writing run artifacts failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that stem from user-supplied configuration rather
    /// than from the simulation itself. The CLI maps these to exit code 2
    /// and everything else to exit code 3.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }

    /// Short machine-readable tag for the error record the CLI emits.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Config(_) => "config",
            Error::Singular(_) => "singular",
            Error::NoConvergence(_) => "no_convergence",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
