use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Float with 17 significant digits, enough for a bit-exact round trip.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// A CSV file written row by row with a fixed header; counts its rows.
pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
    width: usize,
    rows: usize,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let mut writer = csv::WriterBuilder::new().from_writer(BufWriter::new(File::create(path)?));
        writer.write_record(header)?;
        Ok(Self {
            path: path.to_path_buf(),
            writer,
            width: header.len(),
            rows: 0,
        })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let record = csv::ByteRecord::from_iter(fields);
        debug_assert_eq!(record.len(), self.width, "{}", self.path.display());
        self.writer.write_byte_record(&record)?;
        self.rows += 1;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<OutputFile> {
        self.flush()?;
        Ok(OutputFile {
            path: self.path,
            rows: Some(self.rows),
        })
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<OutputFile> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(OutputFile {
        path: path.to_path_buf(),
        rows: None,
    })
}

/// One emitted file; `rows` excludes the header and is `None` for JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Seconds since the Unix epoch; honors `SOURCE_DATE_EPOCH`.
    pub timestamp: u64,
    /// Resolved configuration or command arguments.
    pub config: serde_json::Value,
    pub seeds: serde_json::Value,
    pub files: Vec<OutputFile>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seeds: serde_json::Value) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or_else(|| {
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs())
            });
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            timestamp,
            config,
            seeds,
            files: Vec::new(),
        }
    }

    /// Writes `manifest.json` into `dir`, listing files relative to it.
    pub fn write(mut self, dir: &Path) -> Result<PathBuf> {
        for f in &mut self.files {
            if let Ok(rel) = f.path.strip_prefix(dir) {
                f.path = rel.to_path_buf();
            }
        }
        let path = dir.join("manifest.json");
        write_json(&path, &self)?;
        Ok(path)
    }
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    pub n_nodes: usize,
    pub radius_km: f64,
    pub m: f64,
    pub m_stderr: f64,
    pub chi: Option<f64>,
    pub binder: f64,
    pub s2_over_s1: f64,
    pub mean_degree: f64,
    pub avg_clustering: f64,
    pub avg_path: Option<f64>,
    pub s_star: Option<f64>,
    #[serde(default)]
    pub chi_stderr: Option<f64>,
    #[serde(default)]
    pub s2_over_s1_stderr: Option<f64>,
    #[serde(default)]
    pub mean_degree_stderr: Option<f64>,
    #[serde(default)]
    pub avg_clustering_stderr: Option<f64>,
    #[serde(default)]
    pub avg_path_stderr: Option<f64>,
    #[serde(default)]
    pub s_star_stderr: Option<f64>,
    #[serde(default)]
    pub n_realizations: Option<usize>,
    #[serde(default)]
    pub n_pulses: Option<u32>,
    #[serde(default)]
    pub loss_db_per_km: Option<f64>,
}

pub const SWEEP_HEADER: [&str; 22] = [
    "rho",
    "n_nodes",
    "radius_km",
    "m",
    "m_stderr",
    "chi",
    "binder",
    "s2_over_s1",
    "mean_degree",
    "avg_clustering",
    "avg_path",
    "s_star",
    "chi_stderr",
    "s2_over_s1_stderr",
    "mean_degree_stderr",
    "avg_clustering_stderr",
    "avg_path_stderr",
    "s_star_stderr",
    "n_realizations",
    "n_pulses",
    "loss_db_per_km",
    "status",
];

/// Status cell of a completed sweep row; anything else marks a failure.
pub const STATUS_OK: &str = "ok";

fn schema(path: &Path, reason: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn open_csv(path: &Path, required: &[&str]) -> Result<csv::Reader<File>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let missing: Vec<&str> = required
        .iter()
        .copied()
        .filter(|c| !headers.iter().any(|h| h == *c))
        .collect();
    if !missing.is_empty() {
        return Err(schema(
            path,
            format!("missing column(s): {}", missing.join(", ")),
        ));
    }
    Ok(reader)
}

/// Reads a sweep table. Failure-marker rows are rejected: an interrupted
/// sweep is not valid analysis input.
pub fn read_sweep(path: &Path) -> Result<Vec<SweepRow>> {
    let mut reader = open_csv(path, &SWEEP_HEADER[..12])?;
    let headers = reader.headers()?.clone();
    let status_col = headers.iter().position(|h| h == "status");
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if let Some(c) = status_col {
            let status = record.get(c).unwrap_or_default();
            if status != STATUS_OK {
                return Err(schema(
                    path,
                    format!("row {} is a failure marker: {status}", line + 1),
                ));
            }
        }
        let row: SweepRow = record
            .deserialize(Some(&headers))
            .map_err(|e| schema(path, format!("row {}: {e}", line + 1)))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(schema(path, "no data rows"));
    }
    Ok(rows)
}

/// Cluster-size table: (n_nodes, rho bits) → n(s).
pub type NsTable = BTreeMap<(usize, u64), BTreeMap<usize, f64>>;

#[derive(Debug, Deserialize)]
struct NsRow {
    rho: f64,
    n_nodes: usize,
    s: usize,
    n_s: f64,
}

pub fn read_ns(path: &Path) -> Result<NsTable> {
    let mut reader = open_csv(path, &["rho", "n_nodes", "s", "n_s"])?;
    let mut out = NsTable::new();
    for (line, row) in reader.deserialize::<NsRow>().enumerate() {
        let r = row.map_err(|e| schema(path, format!("row {}: {e}", line + 1)))?;
        out.entry((r.n_nodes, r.rho.to_bits()))
            .or_default()
            .insert(r.s, r.n_s);
    }
    Ok(out)
}

/// Degree table: (n_nodes, rho bits) → (mean degree, P(k)).
pub type DegreeTable = BTreeMap<(usize, u64), BTreeMap<usize, f64>>;

#[derive(Debug, Deserialize)]
struct DegreeRow {
    rho: f64,
    n_nodes: usize,
    k: usize,
    p_k: f64,
}

pub fn read_degree(path: &Path) -> Result<DegreeTable> {
    let mut reader = open_csv(path, &["rho", "n_nodes", "k", "p_k"])?;
    let mut out = DegreeTable::new();
    for (line, row) in reader.deserialize::<DegreeRow>().enumerate() {
        let r = row.map_err(|e| schema(path, format!("row {}: {e}", line + 1)))?;
        out.entry((r.n_nodes, r.rho.to_bits()))
            .or_default()
            .insert(r.k, r.p_k);
    }
    Ok(out)
}
