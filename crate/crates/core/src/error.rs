use std::fmt;

use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("moment of order {order} is undefined for {family}")]
    MomentUndefined { family: String, order: u32 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("structure error: {0}")]
    Structure(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("not computed: {0}")]
    NotComputed(String),
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag used by the CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::UnknownName { .. } => "unknown_name",
            Error::MomentUndefined { .. } => "moment_undefined",
            Error::Domain(_) => "domain",
            Error::Unsupported(_) => "unsupported",
            Error::Dimension { .. } => "dimension",
            Error::Structure(_) => "structure",
            Error::Data(_) => "data",
            Error::Resource(_) => "resource",
            Error::NotComputed(_) => "not_computed",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
            Error::Numerical(_) => "numerical",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// A non-fatal condition reported alongside a result.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Warning {
    pub module: &'static str,
    pub code: &'static str,
    pub message: String,
}

impl Warning {
    pub fn new(module: &'static str, code: &'static str, message: impl Into<String>) -> Self {
        let w = Warning {
            module,
            code,
            message: message.into(),
        };
        log::warn!(target: module, "{}", w.message);
        w
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WARNING|{}|{}", self.module, self.message)
    }
}
