//! CSV rows, run manifests and atomic file writes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;

/// Column order of every CSV this tool writes.
pub const CSV_HEADER: [&str; 7] = [
    "experiment",
    "C",
    "class",
    "metric",
    "value",
    "stderr",
    "seed",
];

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// One CSV row. Empty optional fields are written as empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub capacity: Option<u32>,
    pub class: Option<String>,
    pub metric: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub seed: Option<u64>,
}

impl Row {
    pub fn analytic(experiment: impl Into<String>, metric: impl Into<String>, value: f64) -> Self {
        Self {
            experiment: experiment.into(),
            capacity: None,
            class: None,
            metric: metric.into(),
            value,
            stderr: None,
            seed: None,
        }
    }
}

fn cell<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Shortest round-trip form, switching to exponent notation for tiny and huge values.
fn number(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            cell(r.capacity),
            r.class.clone().unwrap_or_default(),
            r.metric.clone(),
            number(r.value),
            r.stderr.map(number).unwrap_or_default(),
            cell(r.seed),
        ])?;
    }
    w.flush()
}

pub fn csv_bytes(rows: &[Row]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory cannot fail");
    buf
}

/// Everything needed to re-run an experiment and get the same CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: ExperimentConfig,
    pub results: String,
}

impl Manifest {
    pub fn new(experiment: ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            experiment,
            results: RESULTS_FILE.into(),
        }
    }
}

/// Write through a sibling temporary file and rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = PathBuf::from(path);
    let name = path.file_name().ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name")
    })?;
    tmp.set_file_name(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Write `results.csv` and `manifest.json` into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, rows: &[Row], manifest: &Manifest) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_atomic(&dir.join(RESULTS_FILE), &csv_bytes(rows))?;
    let json = serde_json::to_vec_pretty(manifest).map_err(io::Error::other)?;
    write_atomic(&dir.join(MANIFEST_FILE), &json)
}
