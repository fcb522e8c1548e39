use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Variants are grouped by the kind of failure so that front-ends can map
/// them onto distinct exit codes (see [`Error::category`]).
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-contract user input.
    #[error("input error: {0}")]
    Input(String),

    /// A structural invariant was violated (closure, ordering, encodability, ...).
    #[error("invariant violated in {stage}: {message}")]
    Invariant { stage: String, message: String },

    /// A numerical procedure failed to meet its tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A caller broke an API contract (e.g. undeclared polynomial parity).
    #[error("contract error: {0}")]
    Contract(String),

    /// A supplied spectral bound is not strictly below the measured quantity.
    #[error("certified bound violated: {0}")]
    CertifiedBound(String),

    /// A polynomial failed its band certification on the dense grid.
    #[error("polynomial certification failed: {0}")]
    Certification(String),

    /// A degenerate instance for which the requested quantity is undefined.
    #[error("undefined: {0}")]
    Undefined(String),

    /// Size or degree cap exceeded.
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Coarse failure classes used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Input,
    Invariant,
    Resource,
}

impl Error {
    pub fn invariant(stage: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invariant { stage: stage.into(), message: message.into() }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Input(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => ErrorCategory::Input,
            Error::Resource(_) => ErrorCategory::Resource,
            Error::Invariant { .. }
            | Error::Numerical(_)
            | Error::Contract(_)
            | Error::CertifiedBound(_)
            | Error::Certification(_)
            | Error::Undefined(_) => ErrorCategory::Invariant,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
