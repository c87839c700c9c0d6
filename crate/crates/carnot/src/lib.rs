//! Command-line front end for `carnot-core`: file formats, presets, parallel
//! drivers and the named experiments.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod files;
pub mod json;
pub mod parallel;
pub mod presets;

pub use error::CliError;
