//! Command-line front end for the loopscan pipeline.

pub mod args;
pub mod commands;
pub mod config;

pub use args::{run, Cli};
pub use commands::Status;
pub use config::{Mode, RunConfig};
