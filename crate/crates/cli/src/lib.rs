//! Batch driver for the pencil laboratory: scenario files in, JSON reports
//! and CSV tables out.

pub mod error;
pub mod export;
pub mod report;
pub mod run;
pub mod scenario;

pub use error::CliError;
pub use report::RunReport;
pub use run::{run, RunOptions};
pub use scenario::Scenario;
