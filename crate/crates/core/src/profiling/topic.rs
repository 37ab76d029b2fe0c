//! Keyword-lexicon topic assignment.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::labels::Topic;
use crate::sparql::{local_name, ParsedQuery, Term};
use crate::text;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("topic lexicon line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TopicLexicon {
    pub keywords: BTreeMap<Topic, BTreeSet<String>>,
}

impl TopicLexicon {
    /// Reads `<TopicLabel> <keyword>` lines.
    pub fn parse(src: &str) -> Result<Self, LexiconError> {
        let mut lex = TopicLexicon::default();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| LexiconError::Syntax { line: i + 1, reason };
            let mut parts = line.split_whitespace();
            let (Some(label), Some(keyword), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(err("expected `<TopicLabel> <keyword>`".into()));
            };
            let topic: Topic = label.parse().map_err(|_| err(format!("unknown topic `{label}`")))?;
            if topic == Topic::None {
                return Err(err("`None` cannot carry keywords".into()));
            }
            lex.keywords.entry(topic).or_default().insert(keyword.to_lowercase());
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let src = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&src)
    }
}

/// Tokens of the constant IRI local names and literal texts of the BGP.
pub fn query_tokens(q: &ParsedQuery) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for t in q.bgp().into_iter().flat_map(|t| t.terms()) {
        match t {
            Term::Iri(iri) => out.extend(text::tokens(local_name(iri))),
            Term::Literal(l) => out.extend(text::tokens(&l.lexical)),
            Term::Variable(_) | Term::Blank(_) => {}
        }
    }
    out
}

/// Topic with the most distinct matched keywords; ties go to the
/// lexicographically smallest label name.
pub fn assign_topic(q: &ParsedQuery, lex: &TopicLexicon) -> Topic {
    let tokens = query_tokens(q);
    let mut best: Option<(usize, Topic)> = None;
    for (&topic, keywords) in &lex.keywords {
        let score = keywords.iter().filter(|k| tokens.contains(*k)).count();
        if score == 0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((s, t)) => score > s || (score == s && topic.as_str() < t.as_str()),
        };
        if better {
            best = Some((score, topic));
        }
    }
    best.map_or(Topic::None, |(_, t)| t)
}
