//! Regex-driven syntactic repair.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::parse_query;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrectionStatus {
    AlreadyCorrect,
    Corrected,
    Uncorrectable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionResult {
    pub status: CorrectionStatus,
    /// Repaired text when `Corrected`, otherwise the input unchanged.
    pub text: String,
    /// Names of the rewrites that produced `text`.
    pub applied: Vec<&'static str>,
}

impl CorrectionResult {
    pub(crate) fn unchanged(status: CorrectionStatus, text: &str) -> Self {
        Self {
            status,
            text: text.to_string(),
            applied: Vec::new(),
        }
    }
}

type Rewrite = fn(&str) -> Option<String>;

/// Rewrites in the order they are tried.
pub const SYNTAX_RULES: &[(&str, Rewrite)] = &[
    ("append-closing-brace", append_closing_braces),
    ("insert-where", insert_where),
    ("fix-select-keyword", fix_select_keyword),
    ("strip-trailing-separator", strip_trailing_separator),
    ("drop-dangling-angle", drop_dangling_angle),
];

fn regex(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("static regex"))
}

/// Appends up to two `}` when opening braces outnumber closing ones.
fn append_closing_braces(text: &str) -> Option<String> {
    let open = text.matches('{').count();
    let close = text.matches('}').count();
    let missing = open.checked_sub(close)?;
    if !(1..=2).contains(&missing) {
        return None;
    }
    Some(format!("{}{}", text.trim_end(), "}".repeat(missing)))
}

/// Inserts `WHERE` before the pattern group when the keyword is absent.
fn insert_where(text: &str) -> Option<String> {
    static WHERE: OnceLock<Regex> = OnceLock::new();
    static FORM: OnceLock<Regex> = OnceLock::new();
    if regex(&WHERE, r"(?i)\bWHERE\b").is_match(text) {
        return None;
    }
    let form = regex(&FORM, r"(?i)\b(SELECT|CONSTRUCT)\b").find(text)?;
    let after = form.end();
    let is_construct = form.as_str().eq_ignore_ascii_case("CONSTRUCT");
    let mut search_from = after;
    if is_construct {
        // Skip the template group.
        let open = after + text[after..].find('{')?;
        let mut depth = 0usize;
        let mut close = None;
        for (i, c) in text[open..].char_indices() {
            match c {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(open + i + 1);
                        break;
                    }
                }
                _ => {}
            }
        }
        search_from = close?;
    }
    let brace = search_from + text[search_from..].find('{')?;
    Some(format!("{}WHERE {}", &text[..brace], &text[brace..]))
}

fn fix_select_keyword(text: &str) -> Option<String> {
    static TYPO: OnceLock<Regex> = OnceLock::new();
    let re = regex(&TYPO, r"(?i)\b(SELCT|SLECT)\b");
    re.is_match(text).then(|| re.replace_all(text, "SELECT").into_owned())
}

fn strip_trailing_separator(text: &str) -> Option<String> {
    let last = text.rfind('}')?;
    let tail = &text[last + 1..];
    if tail.trim().is_empty() || !tail.chars().all(|c| c.is_whitespace() || c == ';' || c == '.') {
        return None;
    }
    Some(text[..=last].to_string())
}

/// Drops `<` characters that neither open an IRI nor act as a comparison.
fn drop_dangling_angle(text: &str) -> Option<String> {
    let bytes: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut changed = false;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == '<' {
            let next = bytes.get(i + 1).copied();
            let operator = matches!(next, None | Some('=')) || next.is_some_and(char::is_whitespace);
            let closes = bytes[i + 1..]
                .iter()
                .take_while(|c| !c.is_whitespace() && !"<\"{}|^`\\".contains(**c))
                .any(|&c| c == '>');
            if !operator && !closes {
                changed = true;
                i += 1;
                continue;
            }
        }
        out.push(c);
        i += 1;
    }
    changed.then_some(out)
}

/// Tries each rewrite alone, in order, then all applicable rewrites
/// chained; the first variant that parses wins.
pub fn correct_syntax(text: &str) -> CorrectionResult {
    if parse_query(text).is_ok() {
        return CorrectionResult::unchanged(CorrectionStatus::AlreadyCorrect, text);
    }
    for (name, rule) in SYNTAX_RULES {
        if let Some(candidate) = rule(text) {
            if parse_query(&candidate).is_ok() {
                return CorrectionResult {
                    status: CorrectionStatus::Corrected,
                    text: candidate,
                    applied: vec![name],
                };
            }
        }
    }
    let mut chained = text.to_string();
    let mut applied = Vec::new();
    for (name, rule) in SYNTAX_RULES {
        if let Some(candidate) = rule(&chained) {
            chained = candidate;
            applied.push(*name);
        }
    }
    if applied.len() > 1 && parse_query(&chained).is_ok() {
        return CorrectionResult {
            status: CorrectionStatus::Corrected,
            text: chained,
            applied,
        };
    }
    CorrectionResult::unchanged(CorrectionStatus::Uncorrectable, text)
}
