//! Command-line harness for `mwumech-core`: JSON input documents, the
//! subcommands and their reports.

pub mod cli;
pub mod commands;
pub mod error;
pub mod input;
pub mod json;
pub mod report;
