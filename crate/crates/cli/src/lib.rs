//! File formats, reports, and command implementations behind the `mps` binary.

pub mod args;
pub mod commands;
pub mod error;
pub mod matrix_io;
pub mod report;
pub mod traces;

pub use error::{CliError, Result};
