//! Scenario runner for `epr-core`: TOML experiment descriptions, parallel
//! seeded sampling, `report.json` and per-trial record files.

pub mod records;
pub mod report;
pub mod run;
pub mod sampling;
pub mod scenario;

pub use run::{run, write_outputs, LabError, RunOptions, RunOutput};
pub use scenario::Scenario;
