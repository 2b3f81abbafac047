//! Artifacts, the manifest, and failure classification.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Structure,
    NotConverged,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Io => 1,
            ErrorKind::Config => 2,
            ErrorKind::Structure => 3,
            ErrorKind::NotConverged => 4,
        }
    }
}

#[derive(Debug)]
pub struct RunError {
    pub kind: ErrorKind,
    pub message: String,
}

impl RunError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        RunError {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ErrorKind::Config => "config error",
            ErrorKind::Structure => "family structure error",
            ErrorKind::NotConverged => "not converged",
            ErrorKind::Io => "i/o error",
        };
        write!(f, "{what}: {}", self.message)
    }
}

impl std::error::Error for RunError {}

impl From<qpf_core::Error> for RunError {
    fn from(e: qpf_core::Error) -> Self {
        use qpf_core::Error as E;
        let kind = match &e {
            E::NonFinite(_) | E::InvalidParameter(_) | E::Expression(_) | E::RefinementDisabled(_) => ErrorKind::Config,
            E::Structure(_) | E::FibreWrap => ErrorKind::Structure,
            E::InverseNotConverged { .. } | E::Quadrature(_) | E::FalsePlateau(_) | E::NotConverged(_) => {
                ErrorKind::NotConverged
            }
        };
        RunError::new(kind, e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::new(ErrorKind::Io, e.to_string())
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::new(ErrorKind::Io, e.to_string())
    }
}

/// Output files held in memory until the run has succeeded.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("report serialises");
        text.push('\n');
        self.add(name, text.into_bytes());
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), RunError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::new(ErrorKind::Io, e.to_string()))?;
        self.add(name, bytes);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub mode: String,
    pub seed: u64,
    pub workers: usize,
    pub config: serde_json::Value,
    pub family: serde_json::Value,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every artifact into a staging directory inside `out`, then moves
/// them into place and writes `manifest.json`. On any error the staged and
/// moved files are removed again.
pub fn commit(out: &Path, artifacts: &Artifacts, mut manifest: RunManifest) -> Result<PathBuf, RunError> {
    let created_out = !out.exists();
    fs::create_dir_all(out)?;
    let stage = out.join(format!(".qpf-staging-{}", std::process::id()));
    let mut placed: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<PathBuf, RunError> {
        fs::create_dir_all(&stage)?;
        manifest.outputs.clear();
        for (name, bytes) in &artifacts.files {
            fs::write(stage.join(name), bytes)?;
            manifest.outputs.push(OutputEntry {
                file: name.clone(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(bytes),
            });
        }
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        text.push('\n');
        fs::write(stage.join("manifest.json"), text)?;
        for name in artifacts.names().chain(std::iter::once("manifest.json")) {
            let dest = out.join(name);
            fs::rename(stage.join(name), &dest)?;
            placed.push(dest);
        }
        fs::remove_dir(&stage)?;
        Ok(out.join("manifest.json"))
    })();
    if result.is_err() {
        for p in &placed {
            let _ = fs::remove_file(p);
        }
        let _ = fs::remove_dir_all(&stage);
        if created_out {
            let _ = fs::remove_dir(out);
        }
    }
    result
}

/// Checks that every manifest entry matches the file next to it.
pub fn verify_manifest(dir: &Path) -> Result<bool, RunError> {
    let text = fs::read_to_string(dir.join("manifest.json"))?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| RunError::new(ErrorKind::Io, e.to_string()))?;
    for e in &m.outputs {
        let bytes = fs::read(dir.join(&e.file))?;
        if sha256_hex(&bytes) != e.sha256 || bytes.len() as u64 != e.bytes {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Shortest round-trip decimal form; `NaN`/`inf` spelled out.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
