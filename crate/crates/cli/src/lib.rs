//! Command-line front end for nfwave-core: single runs, dump comparison,
//! seeded datasets and the local HTTP service.

pub mod dataset;
pub mod dump;
pub mod error;
pub mod heatmap;
pub mod manifest;
pub mod report;
pub mod run;
pub mod serve;

pub use error::{CliError, CliResult};
