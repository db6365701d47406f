use std::fmt;

use peano_core::error::Error as CoreError;

/// Harness failures, each mapped to a process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum HarnessError {
    /// Exit code 2.
    Config { field: String, message: String },
    /// Exit code 3.
    Numerical {
        epsilon: f64,
        path: Option<u64>,
        time: f64,
        what: String,
    },
    /// Exit code 4.
    Validation { failed: Vec<String> },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => 2,
            HarnessError::Numerical { .. } => 3,
            HarnessError::Validation { .. } => 4,
        }
    }

    /// Attach ε to a core error; domain errors are blamed on `field`.
    pub fn from_core(e: CoreError, epsilon: f64, field: &str) -> Self {
        match e {
            CoreError::Numerical { time, path, what } => HarnessError::Numerical {
                epsilon,
                path,
                time,
                what,
            },
            CoreError::Domain(message) => HarnessError::Config {
                field: field.into(),
                message: format!("{message} (epsilon = {epsilon})"),
            },
        }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config { field, message } => {
                write!(f, "config error in `{field}`: {message}")
            }
            HarnessError::Numerical {
                epsilon,
                path,
                time,
                what,
            } => {
                let path = path.map_or("-".to_string(), |p| p.to_string());
                write!(
                    f,
                    "numerical failure at epsilon = {epsilon:e}, path {path}, t = {time}: {what}"
                )
            }
            HarnessError::Validation { failed } => {
                write!(f, "validation failed: {}", failed.join(", "))
            }
        }
    }
}

impl std::error::Error for HarnessError {}
