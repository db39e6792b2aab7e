//! Command-line driver: configuration, commands and output files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
