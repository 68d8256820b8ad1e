//! The command-line front end: config loading, the four subcommands, and
//! their CSV/SVG outputs.

pub mod commands;
pub mod config;
pub mod format;
pub mod svg;

pub use commands::{exit_code, load_config, run, run_config, CliOptions, RunOutcome};
pub use config::{Command, RunConfig};
