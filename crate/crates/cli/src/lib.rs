//! Command implementations behind the `portgen` binary.

pub mod config;
pub mod converge;
pub mod error;
pub mod run;
pub mod verify;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
