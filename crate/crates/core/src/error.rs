use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure at t = {time} (path {path:?}): {what}")]
    Numerical {
        time: f64,
        path: Option<u64>,
        what: String,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Attach a path index to a numerical failure.
    pub fn on_path(self, index: u64) -> Self {
        match self {
            Error::Numerical { time, what, .. } => Error::Numerical {
                time,
                path: Some(index),
                what,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
