//! Command-line driver, file formats and parallel execution for `medgate-core`.

pub mod cli;
pub mod commands;
pub mod error;
pub mod exec;
pub mod io;
pub mod num;

pub use cli::Cli;
pub use commands::{run, Outcome};
pub use error::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MEDGATE_OUT_DIR";
