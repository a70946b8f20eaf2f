//! Command line front end and HTTP session service for `sdc-core`.

pub mod cli;
mod error;
pub mod labels;
pub mod service;

pub use error::CliError;
