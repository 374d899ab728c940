//! Error type and the coarse categories used for CLI exit codes.

use std::fmt;

/// Coarse failure category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCategory {
    /// An input violated a documented precondition or parameter domain.
    Precondition,
    /// A simulation would exceed a size cap.
    Cap,
    /// A computed certificate did not hold.
    CertificateFailure,
    /// Reading, parsing or writing failed.
    Io,
}

impl ErrorCategory {
    /// Process exit code for this category.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Precondition => 1,
            ErrorCategory::Cap => 2,
            ErrorCategory::CertificateFailure => 3,
            ErrorCategory::Io => 4,
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorCategory::Precondition => "precondition",
            ErrorCategory::Cap => "cap",
            ErrorCategory::CertificateFailure => "certificate-failure",
            ErrorCategory::Io => "io",
        };
        f.write_str(s)
    }
}

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Distribution invariant violated; `index` names the first offending outcome.
    #[error("invalid distribution{}: {reason}", .index.map(|i| format!(" at outcome {i}")).unwrap_or_default())]
    InvalidDistribution {
        /// Offending outcome index, if the violation is local to one outcome.
        index: Option<usize>,
        /// Human readable reason.
        reason: String,
    },
    /// A parameter is outside its domain or a moment precondition failed.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Simulation size cap exceeded.
    #[error("{what} needs {needed} > cap {cap}")]
    Cap {
        /// What was being built.
        what: String,
        /// Computed size.
        needed: u128,
        /// Configured cap.
        cap: u128,
    },
    /// A matrix expected to be unitary is not.
    #[error("non-unitary operator at lattice point {index}: deviation {deviation:e}")]
    NonUnitary {
        /// Flat lattice index of the offending family member.
        index: usize,
        /// max |U†U − I|.
        deviation: f64,
    },
    /// Root bracket contains a pole of the eigenphase equation.
    #[error("pole of the eigenphase equation inside [{lo}, {hi}]; use the degenerate spectrum")]
    PoleInBracket {
        /// Bracket start.
        lo: f64,
        /// Bracket end.
        hi: f64,
    },
    /// Root bracket has no sign change.
    #[error("eigenphase equation has no sign change on [{lo}, {hi}]")]
    NoSignChange {
        /// Bracket start.
        lo: f64,
        /// Bracket end.
        hi: f64,
    },
    /// Register layouts differ.
    #[error("layout mismatch: {0}")]
    Layout(String),
    /// A certificate check failed.
    #[error("certificate failure: {0}")]
    Certificate(String),
    /// Unknown algorithm identifier.
    #[error("unknown algorithm id `{0}`")]
    UnknownAlgorithm(String),
    /// JSON (de)serialization failure.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    /// Filesystem failure.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Category used for exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidDistribution { .. }
            | Error::Precondition(_)
            | Error::NonUnitary { .. }
            | Error::PoleInBracket { .. }
            | Error::NoSignChange { .. }
            | Error::Layout(_)
            | Error::UnknownAlgorithm(_) => ErrorCategory::Precondition,
            Error::Cap { .. } => ErrorCategory::Cap,
            Error::Certificate(_) => ErrorCategory::CertificateFailure,
            Error::Json(_) | Error::Io(_) => ErrorCategory::Io,
        }
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
