use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Argument above a configured evaluation ceiling.
    #[error("range error: {what} = {value} exceeds ceiling {ceiling}")]
    Range {
        what: &'static str,
        value: f64,
        ceiling: f64,
    },

    /// Request would exceed a memory or work budget.
    #[error("resource error: {0}")]
    Resource(String),

    /// A table could not be built to the requested accuracy.
    #[error("construction error: {0}")]
    Construction(String),

    /// Malformed command-line request.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Resource(_) => 3,
            Error::Domain(_) | Error::Range { .. } => 4,
            Error::Construction(_) | Error::Format(_) | Error::Io(_) | Error::Json(_) => 1,
        }
    }
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {value}")))
    }
}
