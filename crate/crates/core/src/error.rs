use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid power {0} W (must be positive and finite)")]
    InvalidPower(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {re}+{im}i is not a constellation point")]
    InvalidPoint { re: f64, im: f64 },

    #[error("code construction failed: {0}")]
    Construction(String),

    #[error("framing error: {0}")]
    Framing(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("split-step solver did not converge: {0}")]
    NonConvergence(String),

    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than the environment.
    pub fn is_config(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
