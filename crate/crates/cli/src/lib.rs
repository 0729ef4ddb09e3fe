//! Pipeline orchestration behind the `egorank` command: configuration,
//! stages, reports and the synthetic-corpus writer.

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;

pub use config::{BucketFilter, ConfigOverrides, PipelineConfig};
pub use error::CliError;
