//! Files written by `run` and `emit-plots`.

use serde::Serialize;
use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};
use crate::run::{Payload, RunRecord};

/// Overrides the default output root `./runs`.
pub const OUTPUT_ROOT_ENV: &str = "WEAKMEAS_OUTPUT_ROOT";
pub const RECORD_FILE: &str = "record.json";
const LOCK_FILE: &str = ".weakmeas.lock";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

/// Exclusive claim on an output directory, released on drop.
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(CliError::Other(format!("{} is locked by another run ({})", dir.display(), path.display())))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn writer(path: &Path) -> CliResult<csv::Writer<File>> {
    Ok(csv::Writer::from_path(path)?)
}

/// Record JSON plus the raw result tables.
pub fn write_run(dir: &Path, record: &RunRecord) -> CliResult<Vec<PathBuf>> {
    let mut written = vec![dir.join(RECORD_FILE)];
    write_json(&written[0], record)?;
    match &record.result {
        Payload::WeakLimit(r) => {
            let path = dir.join("series.csv");
            let mut w = writer(&path)?;
            w.write_record(["lambda", "conditional_average", "target"])?;
            for [l, v] in &r.record.series {
                w.write_record([l.to_string(), v.to_string(), r.target.to_string()])?;
            }
            w.flush()?;
            written.push(path);
        }
        Payload::Lundeen(r) => {
            let path = dir.join("points.csv");
            let mut w = writer(&path)?;
            let d = &r.report.diagnostics;
            w.write_record(["x", "xi", "eta", "alpha", "epsilon", "raw_re", "raw_im", "postselection_mass", "failed"])?;
            for ((x, p), raw) in r.report.centers.iter().zip(&r.report.points).zip(&r.report.raw_points) {
                w.write_record([
                    x.to_string(),
                    p.re.to_string(),
                    p.im.to_string(),
                    d.alpha.to_string(),
                    d.epsilon.to_string(),
                    raw.re.to_string(),
                    raw.im.to_string(),
                    d.postselection_mass.to_string(),
                    d.postselection_failed.to_string(),
                ])?;
            }
            w.flush()?;
            written.push(path);
        }
        Payload::PhaseSpace(r) => {
            written.extend(write_husimi(dir, "husimi", &r.husimi)?);
        }
    }
    Ok(written)
}

fn write_husimi(dir: &Path, stem: &str, h: &weakmeas::reconstruction::PhaseSpaceDistribution) -> CliResult<Vec<PathBuf>> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut w = writer(&csv_path)?;
    w.write_record(h.ps().iter().map(|p| format!("p={p}")))?;
    for row in &h.values {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush()?;
    let header = serde_json::json!({
        "rows": "q",
        "columns": "p",
        "q_axis": h.q_axis,
        "p_axis": h.p_axis,
        "qs": h.qs(),
        "ps": h.ps(),
        "cell": h.cell(),
        "total": h.total(),
    });
    let json_path = dir.join(format!("{stem}.json"));
    write_json(&json_path, &header)?;
    Ok(vec![csv_path, json_path])
}

pub fn load_record(path: &Path) -> CliResult<RunRecord> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Plot-ready series derived from a record.
pub fn emit_plots(record: &RunRecord, dir: &Path) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    match &record.result {
        Payload::WeakLimit(r) => {
            let path = dir.join("lambda_series.csv");
            let mut w = writer(&path)?;
            w.write_record(["lambda", "conditional_average"])?;
            for [l, v] in &r.record.series {
                w.write_record([l.to_string(), v.to_string()])?;
            }
            w.flush()?;
            Ok(vec![path])
        }
        Payload::Lundeen(r) => {
            let path = dir.join("lundeen_table.csv");
            let mut w = writer(&path)?;
            w.write_record(["x", "re", "im", "truth_re", "truth_im"])?;
            for row in &r.table {
                w.write_record([row.x, row.estimate[0], row.estimate[1], row.truth[0], row.truth[1]].map(|v| v.to_string()))?;
            }
            w.flush()?;
            Ok(vec![path])
        }
        Payload::PhaseSpace(r) => write_husimi(dir, "husimi_matrix", &r.husimi),
    }
}
