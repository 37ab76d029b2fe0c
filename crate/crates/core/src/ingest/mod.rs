//! Raw log ingestion: line splitting, per-format record parsing, and
//! selection of SELECT/CONSTRUCT queries.

mod clf;
mod csv_line;
mod decode;
mod extract;

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use decode::{decode_component, decode_query_param};
pub use extract::{extract_queries, leading_keyword, ExtractStats, ExtractedQuery, RequestKind};

/// Supported on-disk log layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogFormat {
    /// Common / Combined Log Format, query in the `query=` request parameter.
    Clf,
    /// `client,timestamp,status,url-encoded query`.
    Csv,
}

impl FromStr for LogFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "clf" => Ok(LogFormat::Clf),
            "csv" => Ok(LogFormat::Csv),
            other => Err(format!("unknown log format `{other}` (expected clf or csv)")),
        }
    }
}

impl fmt::Display for LogFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogFormat::Clf => "clf",
            LogFormat::Csv => "csv",
        })
    }
}

/// One physical line of a log file, terminator stripped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLogLine {
    pub source_path: PathBuf,
    pub line_number: usize,
    pub text: String,
}

/// Who issued a request: an address for scholarly-style logs, an opaque
/// user/session id for logs that do not expose addresses.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum ClientIdentity {
    Ip(String),
    Session(String),
}

impl ClientIdentity {
    /// Addresses that parse as IPs become `Ip`, everything else is a session id.
    pub fn classify(raw: &str) -> Self {
        if raw.parse::<std::net::IpAddr>().is_ok() {
            ClientIdentity::Ip(raw.to_string())
        } else {
            ClientIdentity::Session(raw.to_string())
        }
    }

    pub fn ip(&self) -> Option<&str> {
        match self {
            ClientIdentity::Ip(ip) => Some(ip),
            ClientIdentity::Session(_) => None,
        }
    }

    pub fn session_id(&self) -> Option<&str> {
        match self {
            ClientIdentity::Session(id) => Some(id),
            ClientIdentity::Ip(_) => None,
        }
    }
}

impl fmt::Display for ClientIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClientIdentity::Ip(ip) => write!(f, "ip:{ip}"),
            ClientIdentity::Session(id) => write!(f, "session:{id}"),
        }
    }
}

impl FromStr for ClientIdentity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            Some(("ip", v)) => Ok(ClientIdentity::Ip(v.to_string())),
            Some(("session", v)) => Ok(ClientIdentity::Session(v.to_string())),
            _ => Err(format!("bad client identity `{s}`")),
        }
    }
}

/// Where a record came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Origin {
    pub source_path: String,
    pub line_number: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRecord {
    pub client: ClientIdentity,
    pub timestamp: DateTime<FixedOffset>,
    pub http_method: String,
    pub status_code: u16,
    pub response_size: Option<u64>,
    pub user_agent: Option<String>,
    /// Decoded `query` parameter, if the request carried one.
    pub raw_query: Option<String>,
    pub origin: Origin,
}

/// A line that could not be turned into a [`LogRecord`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line_number}: {reason}")]
pub struct IngestError {
    pub line_number: usize,
    pub reason: String,
}

impl IngestError {
    fn new(line_number: usize, reason: impl Into<String>) -> Self {
        Self {
            line_number,
            reason: reason.into(),
        }
    }
}

/// File-level failure: nothing could be read.
#[derive(Debug, Error)]
#[error("cannot read {path}: {source}")]
pub struct FileError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

/// Streaming reader over the physical lines of a file.
pub struct RawLines {
    path: PathBuf,
    inner: io::Split<BufReader<File>>,
    line_number: usize,
}

impl Iterator for RawLines {
    type Item = io::Result<RawLogLine>;

    fn next(&mut self) -> Option<Self::Item> {
        let bytes = self.inner.next()?;
        self.line_number += 1;
        Some(bytes.map(|mut b| {
            if b.last() == Some(&b'\r') {
                b.pop();
            }
            RawLogLine {
                source_path: self.path.clone(),
                line_number: self.line_number,
                text: String::from_utf8_lossy(&b).into_owned(),
            }
        }))
    }
}

pub fn read_lines(path: &Path) -> Result<RawLines, FileError> {
    let file = File::open(path).map_err(|source| FileError {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(RawLines {
        path: path.to_path_buf(),
        inner: BufReader::new(file).split(b'\n'),
        line_number: 0,
    })
}

/// Parses a single raw line in the given format.
pub fn parse_line(line: &RawLogLine, format: LogFormat) -> Result<LogRecord, IngestError> {
    if line.text.trim().is_empty() {
        return Err(IngestError::new(line.line_number, "empty line"));
    }
    let origin = Origin {
        source_path: line.source_path.display().to_string(),
        line_number: line.line_number,
    };
    let parsed = match format {
        LogFormat::Clf => clf::parse(&line.text, origin),
        LogFormat::Csv => csv_line::parse(&line.text, origin),
    };
    parsed.map_err(|reason| IngestError::new(line.line_number, reason))
}

/// Yields exactly one record or one error per physical line, in file order.
pub fn parse_log_file(
    path: &Path,
    format: LogFormat,
) -> Result<impl Iterator<Item = Result<LogRecord, IngestError>>, FileError> {
    let mut lines = read_lines(path)?;
    Ok(std::iter::from_fn(move || {
        let next = lines.next()?;
        Some(match next {
            Ok(raw) => parse_line(&raw, format),
            Err(e) => Err(IngestError::new(lines.line_number, format!("read error: {e}"))),
        })
    }))
}

/// Interprets a timestamp without an offset as UTC.
pub(crate) fn utc_offset() -> FixedOffset {
    FixedOffset::east_opt(0).expect("zero offset")
}

pub(crate) fn check_status(code: u16) -> Result<u16, String> {
    if (100..=599).contains(&code) {
        Ok(code)
    } else {
        Err(format!("status code {code} out of range"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(bytes: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(bytes).unwrap();
        f
    }

    #[test]
    fn empty_line_is_an_error() {
        let f = write_tmp(b"\n");
        let out: Vec<_> = parse_log_file(f.path(), LogFormat::Clf).unwrap().collect();
        assert_eq!(out, vec![Err(IngestError::new(1, "empty line"))]);
    }

    #[test]
    fn invalid_utf8_is_replaced_not_rejected() {
        let f = write_tmp(b"10.0.0.1 - - [15/Mar/2010:00:00:01 +0100] \"GET /x\xff HTTP/1.1\" 200 1\r\n");
        let lines: Vec<_> = read_lines(f.path()).unwrap().map(Result::unwrap).collect();
        assert_eq!(lines.len(), 1);
        assert!(lines[0].text.contains('\u{FFFD}'));
        assert!(!lines[0].text.ends_with('\r'));
        assert!(parse_line(&lines[0], LogFormat::Clf).is_ok());
    }

    #[test]
    fn missing_file_is_file_level_error() {
        assert!(parse_log_file(Path::new("/definitely/not/here.log"), LogFormat::Clf).is_err());
    }

    #[test]
    fn line_numbers_are_one_based_and_dense() {
        let f = write_tmp(b"a\n\nb\nc");
        let nums: Vec<_> = read_lines(f.path()).unwrap().map(|l| l.unwrap().line_number).collect();
        assert_eq!(nums, vec![1, 2, 3, 4]);
    }

    #[test]
    fn client_identity_text_form() {
        let c = ClientIdentity::classify("127.0.0.1");
        assert_eq!(c.to_string(), "ip:127.0.0.1");
        assert_eq!(
            "session:u42".parse::<ClientIdentity>().unwrap(),
            ClientIdentity::classify("u42")
        );
    }
}
