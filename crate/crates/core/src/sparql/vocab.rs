use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VocabularyError {
    #[error("cannot read vocabulary {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("vocabulary line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

/// Ontology terms known to the endpoint: classes, predicates and labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub classes: BTreeSet<String>,
    pub predicates: BTreeSet<String>,
    pub labels: BTreeMap<String, Vec<String>>,
}

fn angle_iri(s: &str) -> Option<(&str, &str)> {
    let s = s.trim_start().strip_prefix('<')?;
    let end = s.find('>')?;
    let iri = &s[..end];
    iri.contains(':').then_some((iri, &s[end + 1..]))
}

impl Vocabulary {
    pub fn is_empty(&self) -> bool {
        self.classes.is_empty() && self.predicates.is_empty()
    }

    /// Reads `class <IRI>` / `predicate <IRI>` / `label <IRI> text` lines.
    /// Blank lines and `#` comments are skipped.
    pub fn parse(src: &str) -> Result<Self, VocabularyError> {
        let mut v = Vocabulary::default();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: &str| VocabularyError::Syntax {
                line: i + 1,
                reason: reason.to_string(),
            };
            let (kind, rest) = line.split_once(char::is_whitespace).ok_or_else(|| err("missing IRI"))?;
            let (iri, tail) = angle_iri(rest).ok_or_else(|| err("expected absolute <IRI>"))?;
            match kind {
                "class" => {
                    v.classes.insert(iri.to_string());
                }
                "predicate" => {
                    v.predicates.insert(iri.to_string());
                }
                "label" => {
                    let text = tail.trim();
                    if text.is_empty() {
                        return Err(err("missing label text"));
                    }
                    v.labels.entry(iri.to_string()).or_default().push(text.to_string());
                }
                other => return Err(err(&format!("unknown record kind `{other}`"))),
            }
            if kind != "label" && !tail.trim().is_empty() {
                return Err(err("trailing text after IRI"));
            }
        }
        Ok(v)
    }

    pub fn load(path: &Path) -> Result<Self, VocabularyError> {
        let src = std::fs::read_to_string(path).map_err(|source| VocabularyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&src)
    }
}
