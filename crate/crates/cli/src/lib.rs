//! Command-line orchestration for GTSA-PCA: configuration, method runs,
//! comparison tables and the files they produce.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod svg;

pub use error::{CliError, ErrorKind};
