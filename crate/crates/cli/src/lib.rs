//! Configuration, dispatch and output for the `pileup` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{parse_config, Command, Format, RunConfig};
pub use error::CliError;
pub use run::run;
