//! Command-line front end: JSON configuration, command dispatch and CSV/JSON
//! emission. Exit codes: 0 success, 1 usage or configuration error, 2
//! numerical failure.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
mod error;
pub mod report;

pub use cli::{run, Cli, Command};
pub use error::CliError;
