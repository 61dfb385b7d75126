//! Reproducible experiment runner for the weakmeas toolkit: TOML configs in,
//! JSON records and CSV tables out.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use run::{execute, Payload, RunRecord};

use std::path::{Path, PathBuf};

/// `run <config>`: execute, write the record and tables, and map a failed
/// postselection to its error after the files are on disk.
pub fn run_config(path: &Path) -> CliResult<(RunRecord, PathBuf)> {
    let cfg = ExperimentConfig::load(path)?;
    let dir = output::output_root().join(cfg.output_dir());
    let _lock = output::DirLock::acquire(&dir)?;
    let record = execute(&cfg)?;
    output::write_run(&dir, &record)?;
    if let Payload::Lundeen(r) = &record.result {
        if let Err(e) = r.report.ensure_postselected() {
            return Err(e.into());
        }
        if r.report.diagnostics.window_warning {
            log::warn!("{}", r.report.diagnostics.messages.join("; "));
        }
    }
    Ok((record, dir))
}
