//! Keeps only SELECT and CONSTRUCT requests.

use serde::{Deserialize, Serialize};

use super::LogRecord;

/// What kind of request a record carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RequestKind {
    Select,
    Construct,
    Ask,
    Describe,
    Update,
    /// A `query=` parameter that is not SPARQL.
    NonSparql,
    /// No `query=` parameter at all.
    NoQuery,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractStats {
    pub records: usize,
    pub select: usize,
    pub construct: usize,
    pub ask: usize,
    pub describe: usize,
    pub update: usize,
    pub non_sparql: usize,
    pub no_query: usize,
}

impl ExtractStats {
    pub fn kept(&self) -> usize {
        self.select + self.construct
    }

    pub fn discarded(&self) -> usize {
        self.records - self.kept()
    }

    fn count(&mut self, kind: RequestKind) {
        self.records += 1;
        match kind {
            RequestKind::Select => self.select += 1,
            RequestKind::Construct => self.construct += 1,
            RequestKind::Ask => self.ask += 1,
            RequestKind::Describe => self.describe += 1,
            RequestKind::Update => self.update += 1,
            RequestKind::NonSparql => self.non_sparql += 1,
            RequestKind::NoQuery => self.no_query += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedQuery {
    pub record: LogRecord,
    pub text: String,
    pub kind: RequestKind,
}

fn skip_ws_and_comments(mut s: &str) -> &str {
    loop {
        s = s.trim_start();
        match s.strip_prefix('#') {
            Some(rest) => s = rest.split_once('\n').map_or("", |(_, r)| r),
            None => return s,
        }
    }
}

fn split_word(s: &str) -> (&str, &str) {
    let end = s
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(s.len());
    s.split_at(end)
}

/// Skips `<...>` after optional whitespace; returns the remainder.
fn skip_iri(s: &str) -> Option<&str> {
    let s = skip_ws_and_comments(s).strip_prefix('<')?;
    let end = s.find('>')?;
    Some(&s[end + 1..])
}

/// First keyword of a query after any PREFIX/BASE prologue, upper-cased.
pub fn leading_keyword(text: &str) -> Option<String> {
    let mut s = text.trim_start_matches('\u{feff}');
    loop {
        s = skip_ws_and_comments(s);
        let (word, rest) = split_word(s);
        if word.is_empty() {
            return None;
        }
        let upper = word.to_ascii_uppercase();
        match upper.as_str() {
            "PREFIX" => {
                let rest = skip_ws_and_comments(rest);
                let colon = rest.find(':')?;
                if rest[..colon].contains(char::is_whitespace) {
                    return None;
                }
                s = skip_iri(&rest[colon + 1..])?;
            }
            "BASE" => s = skip_iri(rest)?,
            _ => return Some(upper),
        }
    }
}

pub fn classify_request(raw_query: Option<&str>) -> RequestKind {
    let Some(text) = raw_query else {
        return RequestKind::NoQuery;
    };
    match leading_keyword(text).as_deref() {
        Some("SELECT") => RequestKind::Select,
        Some("CONSTRUCT") => RequestKind::Construct,
        Some("ASK") => RequestKind::Ask,
        Some("DESCRIBE") => RequestKind::Describe,
        Some("INSERT" | "DELETE" | "LOAD" | "CLEAR" | "CREATE" | "DROP" | "COPY" | "MOVE" | "ADD" | "WITH") => {
            RequestKind::Update
        }
        _ => RequestKind::NonSparql,
    }
}

/// Keeps records whose decoded query is a SELECT or CONSTRUCT; counts the rest.
pub fn extract_queries<I>(records: I) -> (Vec<ExtractedQuery>, ExtractStats)
where
    I: IntoIterator<Item = LogRecord>,
{
    let mut stats = ExtractStats::default();
    let mut kept = Vec::new();
    for record in records {
        let kind = classify_request(record.raw_query.as_deref());
        stats.count(kind);
        if matches!(kind, RequestKind::Select | RequestKind::Construct) {
            let text = record.raw_query.clone().unwrap_or_default();
            kept.push(ExtractedQuery { record, text, kind });
        }
    }
    (kept, stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prologue_is_skipped() {
        assert_eq!(
            leading_keyword("PREFIX f: <http://x/> CONSTRUCT {?s f:p ?o} WHERE {?s f:p ?o}").as_deref(),
            Some("CONSTRUCT")
        );
        assert_eq!(
            leading_keyword("# hi\nbase <http://b/>\n prefix : <http://x/>\nselect * {}").as_deref(),
            Some("SELECT")
        );
    }

    #[test]
    fn kinds() {
        assert_eq!(
            classify_request(Some("DESCRIBE <http://x.org/a>")),
            RequestKind::Describe
        );
        assert_eq!(classify_request(None), RequestKind::NoQuery);
        assert_eq!(classify_request(Some("ask {}")), RequestKind::Ask);
        assert_eq!(classify_request(Some("INSERT DATA {}")), RequestKind::Update);
        assert_eq!(classify_request(Some("hello")), RequestKind::NonSparql);
        assert_eq!(classify_request(Some("")), RequestKind::NonSparql);
    }
}
