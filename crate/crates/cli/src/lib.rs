//! Command-line front end for `bkdv-core`: subcommands, output formats, the
//! verification suite and the on-disk cache.

pub mod cache;
pub mod checks;
pub mod commands;
pub mod report;

pub use commands::{run, Output};
