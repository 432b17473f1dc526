//! On-disk artifacts. CSV files always carry a header row; floats are written
//! in shortest round-trip form with '.' as the decimal separator.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use fc_clt_core::rmt_sim::ReplicateRecord;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: &str = "fc-clt-lab/v1";

/// JSON schema for every document the tool writes.
pub const SCHEMA: &str = include_str!("../schema/fc-clt-lab-v1.schema.json");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Serialize `payload` in canonical form: compact, keys sorted at every level.
/// Re-serializing a parsed document the same way reproduces the bytes.
pub fn canonical_json<T: Serialize>(payload: &T) -> Result<Vec<u8>> {
    let value = serde_json::to_value(payload)?;
    Ok(serde_json::to_vec(&value)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub generated_unix_seconds: u64,
    /// Worker count from the environment, if set.
    pub workers: Option<usize>,
    pub tool_version: &'static str,
}

impl Metadata {
    pub fn now(workers: Option<usize>) -> Self {
        Metadata {
            generated_unix_seconds: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            workers,
            tool_version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// Top-level JSON document. Only `payload` is covered by `payload_sha256`.
#[derive(Debug, Clone, Serialize)]
pub struct Document {
    pub schema: &'static str,
    pub kind: String,
    pub payload: serde_json::Value,
    pub payload_sha256: String,
    pub metadata: Metadata,
}

impl Document {
    pub fn new<T: Serialize>(kind: &str, payload: &T, metadata: Metadata) -> Result<Self> {
        let bytes = canonical_json(payload)?;
        Ok(Document {
            schema: SCHEMA_VERSION,
            kind: kind.to_string(),
            payload: serde_json::from_slice(&bytes)?,
            payload_sha256: sha256_hex(&bytes),
            metadata,
        })
    }

    pub fn to_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<PathBuf> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
    Ok(path.to_path_buf())
}

fn csv_bytes<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
}

#[derive(Serialize)]
struct GridRow {
    x: f64,
    value: f64,
}

/// `x,value` grid.
pub fn grid_csv(points: &[(f64, f64)]) -> Result<Vec<u8>> {
    csv_bytes(points.iter().map(|&(x, value)| GridRow { x, value }))
}

/// `replicate_id,derived_seed,statistic`.
pub fn replicates_csv(records: &[ReplicateRecord]) -> Result<Vec<u8>> {
    csv_bytes(records)
}

#[derive(Serialize)]
struct SpectrumRow {
    replicate_id: usize,
    k: usize,
    s_squared: f64,
}

/// `replicate_id,k,s_squared` with `k` counted from 1 in ascending order.
pub fn spectra_csv(records: &[ReplicateRecord], spectra: &[Vec<f64>]) -> Result<Vec<u8>> {
    csv_bytes(records.iter().zip(spectra).flat_map(|(r, s)| {
        s.iter().enumerate().map(move |(k, &s_squared)| SpectrumRow {
            replicate_id: r.replicate_id,
            k: k + 1,
            s_squared,
        })
    }))
}

#[derive(Serialize)]
pub struct MomentRow {
    pub k: u32,
    pub fc_number: String,
    pub quadrature: f64,
    pub abs_diff: f64,
}

/// `k,fc_number,quadrature,abs_diff`.
pub fn moments_csv(rows: &[MomentRow]) -> Result<Vec<u8>> {
    csv_bytes(rows)
}
