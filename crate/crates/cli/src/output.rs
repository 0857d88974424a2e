//! Result files and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rtmix::experiments::{AggregateRow, ExperimentResult, Snapshot, TimeSeriesRecord};
use rtmix::PeriodicGrid;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// 17 significant digits, period decimal separator.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn time_label(t: f64) -> String {
    format!("t_{t}")
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Writes files under a root directory and remembers their checksums.
pub struct Writer {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl Writer {
    pub fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, rel: &str, contents: &str) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(FileEntry {
            path: rel.to_string(),
            bytes: contents.len() as u64,
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
        });
        Ok(())
    }

    pub fn into_files(self) -> Vec<FileEntry> {
        self.files
    }
}

pub fn timeseries_csv(records: impl Iterator<Item = TimeSeriesRecord>) -> String {
    let mut out = TimeSeriesRecord::COLUMNS.join(",");
    out.push('\n');
    for r in records {
        let cells: Vec<String> = r
            .cells()
            .iter()
            .map(|c| c.map(num).unwrap_or_default())
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn snapshot_csv(grid: PeriodicGrid, snap: &Snapshot) -> String {
    let mut out = String::new();
    match snap {
        Snapshot::Height { h } => {
            out.push_str("alpha,h\n");
            for (j, v) in h.iter().enumerate() {
                let _ = writeln!(out, "{},{}", num(grid.node(j)), num(*v));
            }
        }
        Snapshot::Curve { z1, z2 } => {
            out.push_str("alpha,z1,z2\n");
            for (j, (a, b)) in z1.iter().zip(z2).enumerate() {
                let _ = writeln!(out, "{},{},{}", num(grid.node(j)), num(*a), num(*b));
            }
        }
    }
    out
}

fn spectrum_csv(spectrum: &[f64]) -> String {
    let mut out = String::from("k,E_k\n");
    for (k, e) in spectrum.iter().enumerate() {
        let _ = writeln!(out, "{k},{}", num(*e));
    }
    out
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(
        "t,members,width_mean,width_min,width_max,amplitude_mean,amplitude_min,amplitude_max\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(r.t),
            r.members,
            num(r.width_mean),
            num(r.width_min),
            num(r.width_max),
            num(r.amplitude_mean),
            num(r.amplitude_min),
            num(r.amplitude_max)
        );
    }
    out
}

/// Writes one run's files under `prefix` (empty for a single run).
pub fn write_run(
    w: &mut Writer,
    prefix: &str,
    res: &ExperimentResult,
    format: Format,
) -> Result<()> {
    let grid = PeriodicGrid::new(res.config.grid_n)?;
    match format {
        Format::Csv => {
            w.write(
                &format!("{prefix}timeseries.csv"),
                &timeseries_csv(res.samples.iter().map(|s| s.record)),
            )?;
            for s in &res.samples {
                let label = time_label(s.record.t);
                if let Some(snap) = &s.snapshot {
                    w.write(
                        &format!("{prefix}snapshots/{label}.csv"),
                        &snapshot_csv(grid, snap),
                    )?;
                }
                if let Some(spec) = &s.spectrum {
                    w.write(
                        &format!("{prefix}spectrum/{label}.csv"),
                        &spectrum_csv(spec),
                    )?;
                }
            }
        }
        Format::Json => {
            let body = serde_json::to_string_pretty(&res.samples)?;
            w.write(&format!("{prefix}samples.json"), &body)?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub status: String,
    pub detail: rtmix::RunStatus,
    pub t_reached: f64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
}

impl RunSummary {
    pub fn of(res: &ExperimentResult) -> Self {
        Self {
            seed: res.seed,
            status: res.status.label().to_string(),
            detail: res.status.clone(),
            t_reached: res.last_time(),
            accepted_steps: res.stats.accepted,
            rejected_steps: res.stats.rejected,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub artifact_version: &'static str,
    pub command: &'a str,
    pub config: &'a rtmix::ExperimentConfig,
    pub wall_clock_seconds: f64,
    pub runs: Vec<RunSummary>,
    pub files: Vec<FileEntry>,
}

pub fn write_manifest(root: &Path, manifest: &Manifest<'_>) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(root.join("manifest.json"), text).context("writing manifest.json")
}
