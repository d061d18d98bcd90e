//! File formats, experiment sweeps and the `pecon` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use error::HarnessError;
pub use output::{Algorithm, Format, ResultRow};
