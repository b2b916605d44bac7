use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
///
/// Every variant maps onto one of the process exit codes used by the CLI
/// (see [`Error::exit_code`]).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violates a documented invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A caller-supplied transform or buffer broke an API contract.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("adaptive filter diverged at t = {time_s:.2} s: misalignment {eta_db:.1} dB is {rise_db:.1} dB above its minimum")]
    Divergence { time_s: f64, eta_db: f64, rise_db: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("WAV error on {path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Exit status for the command-line front end.
    ///
    /// 2 for configuration problems, 3 for I/O, 4 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Contract(_) | Error::InsufficientData { .. } | Error::Json(_) => 2,
            Error::Io { .. } | Error::Wav { .. } | Error::UnsupportedFormat(_) => 3,
            Error::Divergence { .. } | Error::NonFinite(_) => 4,
        }
    }
}
