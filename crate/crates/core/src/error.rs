use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument lies outside the domain where the quantity is defined.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// (n, x) is outside the monotonic Plancherel-Rotach regime.
    #[error("precondition violated in {op}: {detail}")]
    Precondition { op: &'static str, detail: String },

    #[error("invalid parameter `{field}`: {detail}")]
    InvalidParams { field: &'static str, detail: String },

    /// The derivative of the argument function has no sign change on the
    /// admissible bracket, which means x is below the largeness threshold.
    #[error("no bracketing sign change for x = {x}, y = {y}: {detail}")]
    BracketFailure { x: f64, y: f64, detail: String },

    #[error("quadrature did not converge for {count} coefficient(s); first index {first}")]
    Quadrature { first: usize, count: usize },

    #[error("configuration error in `{field}`: {detail}")]
    Config { field: String, detail: String },

    #[error("{count} grid point(s) failed; see the error column")]
    PointFailures { count: usize },

    #[error("fixture mismatch: {0}")]
    FixtureMismatch(String),

    #[error("refusing to overwrite existing fixture {0} (pass --force)")]
    FixtureExists(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn precondition(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(field: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParams {
            field,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            detail: detail.into(),
        }
    }
}

/// Process exit status: 1 for configuration problems, 2 for numeric failures,
/// 3 for fixture mismatches.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. }
        | Error::InvalidParams { .. }
        | Error::FixtureExists(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => 1,
        Error::Domain { .. }
        | Error::Precondition { .. }
        | Error::BracketFailure { .. }
        | Error::Quadrature { .. }
        | Error::PointFailures { .. } => 2,
        Error::FixtureMismatch(_) => 3,
    }
}
