//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by constructors, experiments and the scenario runner.
#[derive(Debug, Error)]
pub enum Error {
    /// A structurally invalid argument (bad exponent, kind ordering, dimension mismatch, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A scenario configuration problem, naming the offending field.
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// The wrap-around budget `v_max * T <= 0.45 * min L` is violated.
    #[error(
        "wrap-around guard violated: v_max = {v_max:.6} over horizon {horizon:.6} needs half-length >= {required_half_length:.6}, box has {min_half_length:.6}"
    )]
    Guard {
        v_max: f64,
        horizon: f64,
        min_half_length: f64,
        required_half_length: f64,
    },

    /// An iterative procedure ran out of budget.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// A class-membership or hypothesis certificate failed.
    #[error("certificate failed: {0}")]
    Certificate(String),

    /// Feature outside the implemented range (for example radial maps with d_j > 2).
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Invalid(_) | Error::Unsupported(_) => 2,
            Error::NonConvergence(_) => 3,
            Error::Guard { .. } | Error::Certificate(_) => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
