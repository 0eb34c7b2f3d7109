//! Configuration, field dumps, experiment sweeps and reports around
//! [`divcurl_core`].

pub mod config;
pub mod experiments;
pub mod io;
pub mod report;

use std::fs;
use std::path::Path;

pub use config::{Experiment, ExperimentConfig, Violation};
pub use experiments::{run, Outcome, RunError};
pub use report::{EstimateReport, Row};

/// Writes `rows.csv`, `summary.json` and any `fields/*.bin` under `dir`.
pub fn write_outputs(outcome: &Outcome, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    report::write_rows(&dir.join("rows.csv"), &outcome.rows)?;
    report::write_summary(&dir.join("summary.json"), &outcome.report)?;
    if !outcome.fields.is_empty() {
        let fdir = dir.join("fields");
        fs::create_dir_all(&fdir)?;
        for (name, dump) in &outcome.fields {
            dump.write_binary(&fdir.join(name))?;
        }
    }
    Ok(())
}
