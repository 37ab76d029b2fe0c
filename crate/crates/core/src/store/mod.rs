//! Run directories of newline-delimited JSON snapshots.
//!
//! ```text
//! run-<id>/
//!   stage-<k>-<operator>.records
//!   trusted.records
//!   untrusted.records
//!   profile.report
//! ```
//!
//! Every file is written to a temporary sibling and renamed into place,
//! so readers see either the previous content or the new one.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ingest::{ClientIdentity, Origin};
use crate::labels::Annotations;
use crate::trust::{degree_serde, Degree, TrustVerdict};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("snapshot `{0}` not found")]
    NotFound(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {reason}")]
    Corrupt { path: String, line: usize, reason: String },
    #[error("invalid snapshot name `{0}`")]
    BadName(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_path: String,
    pub line_number: usize,
    pub client: ClientIdentity,
    pub timestamp: DateTime<FixedOffset>,
    pub user_agent: Option<String>,
}

impl Provenance {
    pub fn origin(&self) -> Origin {
        Origin {
            source_path: self.source_path.clone(),
            line_number: self.line_number,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredTrust {
    #[serde(with = "degree_serde")]
    pub degree: Degree,
    pub accepted: bool,
}

impl From<&TrustVerdict> for StoredTrust {
    fn from(v: &TrustVerdict) -> Self {
        Self {
            degree: v.degree,
            accepted: v.accepted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredQueryRecord {
    pub id: String,
    pub text: String,
    pub canonical: String,
    pub annotations: Annotations,
    pub trust: Option<StoredTrust>,
    pub provenance: Provenance,
    pub stage: String,
}

/// Stable id: a truncated SHA-256 of the canonical form and origin.
pub fn record_id(canonical: &str, origin: &Origin) -> String {
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    h.update([0]);
    h.update(origin.source_path.as_bytes());
    h.update([0]);
    h.update(origin.line_number.to_string().as_bytes());
    hex::encode(&h.finalize()[..8])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Records,
    Csv,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "records" => Ok(ExportFormat::Records),
            "csv" => Ok(ExportFormat::Csv),
            _ => Err(format!("unknown export format `{s}` (records|csv)")),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::Records => "records",
            ExportFormat::Csv => "csv",
        })
    }
}

/// One JSON object per line, fields in declaration order.
pub fn encode_records(records: &[StoredQueryRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn decode_records(src: &str, path: &str) -> Result<Vec<StoredQueryRecord>, StoreError> {
    src.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| StoreError::Corrupt {
                path: path.to_string(),
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

const CSV_HEADER: [&str; 12] = [
    "id",
    "text",
    "canonical",
    "annotations",
    "trust_degree",
    "trust_accepted",
    "source_path",
    "line_number",
    "client",
    "timestamp",
    "user_agent",
    "stage",
];

/// An absent agent is an empty field and an empty agent is `""`; a
/// leading backslash escapes agents that would read as either.
fn encode_agent(agent: Option<&str>) -> String {
    match agent {
        None => String::new(),
        Some("") => "\"\"".into(),
        Some(a) if a == "\"\"" || a.starts_with('\\') => format!("\\{a}"),
        Some(a) => a.to_string(),
    }
}

fn decode_agent(field: &str) -> Option<String> {
    match field {
        "" => None,
        "\"\"" => Some(String::new()),
        a => Some(a.strip_prefix('\\').unwrap_or(a).to_string()),
    }
}

pub fn encode_csv(records: &[StoredQueryRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).unwrap();
    for r in records {
        let (degree, accepted) = match &r.trust {
            Some(t) => (
                format!("{}/{}", t.degree.numer(), t.degree.denom()),
                t.accepted.to_string(),
            ),
            None => (String::new(), String::new()),
        };
        let p = &r.provenance;
        w.write_record([
            r.id.as_str(),
            &r.text,
            &r.canonical,
            &r.annotations.to_compact(),
            &degree,
            &accepted,
            &p.source_path,
            &p.line_number.to_string(),
            &p.client.to_string(),
            &p.timestamp.to_rfc3339(),
            &encode_agent(p.user_agent.as_deref()),
            &r.stage,
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

pub fn decode_csv(src: &str, path: &str) -> Result<Vec<StoredQueryRecord>, StoreError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(src.as_bytes());
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let line = i + 2;
        let corrupt = |reason: String| StoreError::Corrupt {
            path: path.to_string(),
            line,
            reason,
        };
        let row = row.map_err(|e| corrupt(e.to_string()))?;
        if row.len() != CSV_HEADER.len() {
            return Err(corrupt(format!(
                "expected {} fields, got {}",
                CSV_HEADER.len(),
                row.len()
            )));
        }
        let trust = match (&row[4], &row[5]) {
            ("", "") => None,
            (d, a) => Some(StoredTrust {
                degree: degree_serde::parse(d).ok_or_else(|| corrupt(format!("bad degree `{d}`")))?,
                accepted: a.parse().map_err(|_| corrupt(format!("bad flag `{a}`")))?,
            }),
        };
        let user_agent = decode_agent(&row[10]);
        out.push(StoredQueryRecord {
            id: row[0].to_string(),
            text: row[1].to_string(),
            canonical: row[2].to_string(),
            annotations: Annotations::from_compact(&row[3]).map_err(|e| corrupt(e.to_string()))?,
            trust,
            provenance: Provenance {
                source_path: row[6].to_string(),
                line_number: row[7].parse().map_err(|_| corrupt("bad line number".into()))?,
                client: row[8].parse().map_err(corrupt)?,
                timestamp: DateTime::parse_from_rfc3339(&row[9]).map_err(|e| corrupt(e.to_string()))?,
                user_agent,
            },
            stage: row[11].to_string(),
        });
    }
    Ok(out)
}

pub fn encode(records: &[StoredQueryRecord], format: ExportFormat) -> String {
    match format {
        ExportFormat::Records => encode_records(records),
        ExportFormat::Csv => encode_csv(records),
    }
}

/// Writes `content` to `path` through a temporary file in the same
/// directory and an atomic rename.
pub fn write_atomic(path: &Path, content: &[u8]) -> Result<(), StoreError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(content).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(())
}

pub fn export(records: &[StoredQueryRecord], format: ExportFormat, path: &Path) -> Result<(), StoreError> {
    write_atomic(path, encode(records, format).as_bytes())
}

pub fn import(path: &Path, format: ExportFormat) -> Result<Vec<StoredQueryRecord>, StoreError> {
    let src = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => StoreError::NotFound(path.display().to_string()),
        _ => io_err(path)(e),
    })?;
    let name = path.display().to_string();
    match format {
        ExportFormat::Records => decode_records(&src, &name),
        ExportFormat::Csv => decode_csv(&src, &name),
    }
}

/// Name under which a pipeline stage is snapshotted.
pub fn stage_snapshot_name(index: usize, operator: &str) -> String {
    format!("stage-{index}-{operator}")
}

pub const TRUSTED: &str = "trusted";
pub const UNTRUSTED: &str = "untrusted";
pub const PROFILE_REPORT: &str = "profile.report";

/// A `run-<id>` directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunStore {
    root: PathBuf,
}

impl RunStore {
    /// Creates (or reopens) `<out>/run-<id>`.
    pub fn create(out: &Path, run_id: &str) -> Result<Self, StoreError> {
        if run_id.is_empty() || run_id.contains(['/', '\\']) || run_id.starts_with('.') {
            return Err(StoreError::BadName(run_id.to_string()));
        }
        let root = out.join(format!("run-{run_id}"));
        std::fs::create_dir_all(&root).map_err(io_err(&root))?;
        Ok(Self { root })
    }

    /// Opens an existing run directory.
    pub fn open(root: &Path) -> Result<Self, StoreError> {
        if !root.is_dir() {
            return Err(StoreError::NotFound(root.display().to_string()));
        }
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn snapshot_path(&self, name: &str) -> Result<PathBuf, StoreError> {
        if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(StoreError::BadName(name.to_string()));
        }
        Ok(self.root.join(format!("{name}.records")))
    }

    /// Replaces the snapshot `name` atomically; returns its file name.
    pub fn write_snapshot(&self, name: &str, records: &[StoredQueryRecord]) -> Result<String, StoreError> {
        let path = self.snapshot_path(name)?;
        write_atomic(&path, encode_records(records).as_bytes())?;
        Ok(format!("{name}.records"))
    }

    pub fn read_snapshot(&self, name: &str) -> Result<Vec<StoredQueryRecord>, StoreError> {
        let path = self.snapshot_path(name)?;
        let src = std::fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => StoreError::NotFound(name.to_string()),
            _ => io_err(&path)(e),
        })?;
        decode_records(&src, &path.display().to_string())
    }

    /// Snapshot names present, sorted.
    pub fn snapshots(&self) -> Result<Vec<String>, StoreError> {
        let mut names = Vec::new();
        for entry in std::fs::read_dir(&self.root).map_err(io_err(&self.root))? {
            let entry = entry.map_err(io_err(&self.root))?;
            if let Some(stem) = entry.file_name().to_str().and_then(|n| n.strip_suffix(".records")) {
                names.push(stem.to_string());
            }
        }
        names.sort();
        Ok(names)
    }

    pub fn write_file(&self, name: &str, content: &str) -> Result<PathBuf, StoreError> {
        if name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(StoreError::BadName(name.to_string()));
        }
        let path = self.root.join(name);
        write_atomic(&path, content.as_bytes())?;
        Ok(path)
    }

    pub fn read_file(&self, name: &str) -> Result<String, StoreError> {
        let path = self.root.join(name);
        std::fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => StoreError::NotFound(name.to_string()),
            _ => io_err(&path)(e),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::{Behavior, Label};

    pub(crate) fn sample(n: usize) -> Vec<StoredQueryRecord> {
        (0..n)
            .map(|i| {
                let origin = Origin {
                    source_path: "a,b.log".into(),
                    line_number: i + 1,
                };
                StoredQueryRecord {
                    id: record_id("SELECT ?v1 WHERE { ?v1 ?v2 ?v3 . }", &origin),
                    text: format!("SELECT ?s WHERE {{ ?s ?p \"x, \"\"y\"\"\n{i}\" }}"),
                    canonical: "SELECT ?v1 WHERE { ?v1 ?v2 ?v3 . }".into(),
                    annotations: [Label::Behavior(Behavior::Organic)].into_iter().collect(),
                    trust: (i % 2 == 0).then(|| StoredTrust {
                        degree: Degree::new(9, 11),
                        accepted: true,
                    }),
                    provenance: Provenance {
                        source_path: origin.source_path,
                        line_number: origin.line_number,
                        client: ClientIdentity::Ip("10.0.0.1".into()),
                        timestamp: DateTime::parse_from_rfc3339("2020-01-02T03:04:05.250+02:00").unwrap(),
                        user_agent: match i % 5 {
                            0 => None,
                            1 => Some(String::new()),
                            2 => Some("\"\"".into()),
                            3 => Some("\\x".into()),
                            _ => Some("Mozilla/5.0 (X11, \"quoted\")".into()),
                        },
                    },
                    stage: "trusted".into(),
                }
            })
            .collect()
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = RunStore::create(dir.path(), "t1").unwrap();
        let recs = sample(3);
        store.write_snapshot("stage-1-x", &recs).unwrap();
        let bytes = std::fs::read(store.root().join("stage-1-x.records")).unwrap();
        let back = store.read_snapshot("stage-1-x").unwrap();
        assert_eq!(back, recs);
        assert_eq!(encode_records(&back).as_bytes(), &bytes[..]);
        assert!(matches!(store.read_snapshot("stage-9-y"), Err(StoreError::NotFound(_))));
        assert_eq!(store.snapshots().unwrap(), vec!["stage-1-x".to_string()]);
    }

    #[test]
    fn csv_round_trip_and_quoting() {
        let recs = sample(5);
        let csv = encode_csv(&recs);
        assert!(csv.contains("\"\"y\"\""));
        let back = decode_csv(&csv, "mem").unwrap();
        assert_eq!(back, recs);
        assert_eq!(encode_csv(&back), csv);
        let two = encode_csv(&recs[..2]);
        let mut rd = csv::Reader::from_reader(two.as_bytes());
        assert_eq!(rd.records().count(), 2);
    }

    #[test]
    fn failed_write_keeps_previous_snapshot() {
        let dir = tempfile::tempdir().unwrap();
        let store = RunStore::create(dir.path(), "t2").unwrap();
        store.write_snapshot("s", &sample(2)).unwrap();
        // A temporary file that is dropped before being persisted never
        // becomes visible.
        {
            let mut tmp = tempfile::NamedTempFile::new_in(store.root()).unwrap();
            tmp.write_all(b"{partial").unwrap();
        }
        assert_eq!(store.read_snapshot("s").unwrap(), sample(2));
        assert_eq!(store.snapshots().unwrap(), vec!["s".to_string()]);
    }

    #[test]
    fn ids_depend_on_origin() {
        let a = Origin {
            source_path: "x".into(),
            line_number: 1,
        };
        let b = Origin {
            source_path: "x".into(),
            line_number: 2,
        };
        assert_ne!(record_id("q", &a), record_id("q", &b));
        assert_eq!(record_id("q", &a), record_id("q", &a.clone()));
        assert_eq!(record_id("q", &a).len(), 16);
    }

    #[test]
    fn rejects_path_like_names() {
        let dir = tempfile::tempdir().unwrap();
        assert!(RunStore::create(dir.path(), "../x").is_err());
        let store = RunStore::create(dir.path(), "ok").unwrap();
        assert!(store.write_snapshot("../evil", &[]).is_err());
    }
}
