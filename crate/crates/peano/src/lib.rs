//! Experiment harness: configuration, deterministic parallel execution and
//! result emission for the `peano` command-line tool.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod validate;

pub use config::{CliOverrides, Experiment, ExperimentConfig, Format, ResolvedConfig};
pub use error::HarnessError;
pub use output::{ResultRow, RunOutput};
pub use run::run;
