//! Uniform-average trust degree over analyzer verdicts.
//!
//! Each roster analyzer contributes 1 when the query's label is in its
//! favorable set and 0 otherwise; the degree is the mean contribution,
//! kept as an exact fraction. A query is accepted only when its degree
//! is strictly above the threshold.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::*;

pub type Degree = Ratio<u64>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrustError {
    #[error("query has no `{0}` annotation")]
    MissingAnnotation(Analyzer),
}

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("policy line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("invalid policy: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrustPolicy {
    pub favorable: BTreeMap<Analyzer, BTreeSet<Label>>,
    pub threshold: Degree,
    pub roster: Vec<Analyzer>,
}

impl Default for TrustPolicy {
    /// Organic, academic (or unknown provenance), safe, unique,
    /// syntactically and semantically sound, on-topic, informative
    /// queries of any shape, expertise and type; threshold 0.75.
    fn default() -> Self {
        use Label as L;
        let sets: [(Analyzer, Vec<Label>); 11] = [
            (Analyzer::Behavior, vec![L::Behavior(Behavior::Organic)]),
            (
                Analyzer::Organism,
                vec![L::Organism(Organism::Academic), L::Organism(Organism::Unknown)],
            ),
            (Analyzer::Vulnerability, vec![L::Vulnerability(Vulnerability::Safe)]),
            (Analyzer::Duplication, vec![L::Duplication(Duplication::Unique)]),
            (
                Analyzer::Syntax,
                vec![L::Syntax(Validity::Correct), L::Syntax(Validity::Corrected)],
            ),
            (
                Analyzer::Semantics,
                vec![L::Semantics(Validity::Correct), L::Semantics(Validity::Corrected)],
            ),
            (
                Analyzer::Topic,
                Topic::ALL
                    .iter()
                    .filter(|&&t| t != Topic::None)
                    .map(|&t| L::Topic(t))
                    .collect(),
            ),
            (Analyzer::Schema, vec![L::Schema(Schema::Informative)]),
            (Analyzer::Shape, Analyzer::Shape.labels()),
            (Analyzer::Expertise, Analyzer::Expertise.labels()),
            (Analyzer::QueryType, Analyzer::QueryType.labels()),
        ];
        Self {
            favorable: sets.into_iter().map(|(a, ls)| (a, ls.into_iter().collect())).collect(),
            threshold: Ratio::new(3, 4),
            roster: Analyzer::ALL.to_vec(),
        }
    }
}

/// Parses a plain decimal such as `0.75` or `1` into an exact fraction.
pub fn parse_decimal(s: &str) -> Option<Degree> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 18 {
        return None;
    }
    let scale = 10u64.checked_pow(frac.len() as u32)?;
    let whole: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let part: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    Some(Ratio::new(whole.checked_mul(scale)?.checked_add(part)?, scale))
}

/// Two decimals, truncated: 9/11 renders `0.81`, 5/11 `0.45`.
pub fn format_degree(d: Degree) -> String {
    let hundredths = d.numer() * 100 / d.denom();
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

impl TrustPolicy {
    fn validate(&self) -> Result<(), PolicyError> {
        if self.roster.is_empty() {
            return Err(PolicyError::Invalid("empty roster".into()));
        }
        let mut seen = BTreeSet::new();
        for a in &self.roster {
            if !seen.insert(*a) {
                return Err(PolicyError::Invalid(format!("`{a}` listed twice in roster")));
            }
            if !self.favorable.contains_key(a) {
                return Err(PolicyError::Invalid(format!("no favorable labels for `{a}`")));
            }
        }
        if self.threshold > Ratio::from_integer(1) {
            return Err(PolicyError::Invalid("threshold above 1".into()));
        }
        Ok(())
    }

    /// Reads `threshold <decimal>`, `favorable <analyzer> <label,…>` and
    /// `roster <analyzer,…>` lines. Omitted keys keep their defaults;
    /// a `favorable` line replaces that analyzer's whole set.
    pub fn parse(src: &str) -> Result<Self, PolicyError> {
        let mut policy = TrustPolicy::default();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| PolicyError::Syntax { line: i + 1, reason };
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["threshold", value] => {
                    policy.threshold = parse_decimal(value).ok_or_else(|| err(format!("bad threshold `{value}`")))?;
                }
                ["favorable", analyzer, labels] => {
                    let a: Analyzer = analyzer.parse().map_err(|e| err(format!("{e}")))?;
                    let set = labels
                        .split(',')
                        .map(|l| a.parse_label(l.trim()).map_err(|e| err(format!("{e}"))))
                        .collect::<Result<BTreeSet<_>, _>>()?;
                    policy.favorable.insert(a, set);
                }
                ["roster", list] => {
                    policy.roster = list
                        .split(',')
                        .map(|a| a.trim().parse::<Analyzer>().map_err(|e| err(format!("{e}"))))
                        .collect::<Result<_, _>>()?;
                }
                _ => return Err(err(format!("unrecognized line `{line}`"))),
            }
        }
        policy.validate()?;
        Ok(policy)
    }

    pub fn load(path: &Path) -> Result<Self, PolicyError> {
        let src = std::fs::read_to_string(path).map_err(|source| PolicyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&src)
    }

    /// Canonical text form; `parse(to_text())` yields an equal policy.
    pub fn to_text(&self) -> String {
        let mut out = format!("threshold {}\n", self.threshold_text());
        let roster: Vec<_> = self.roster.iter().map(|a| a.as_str()).collect();
        out.push_str(&format!("roster {}\n", roster.join(",")));
        for (a, set) in &self.favorable {
            let labels: Vec<_> = set.iter().map(|l| l.as_str()).collect();
            out.push_str(&format!("favorable {} {}\n", a, labels.join(",")));
        }
        out
    }

    fn threshold_text(&self) -> String {
        // Exact when the denominator divides a power of ten.
        let (n, d) = (*self.threshold.numer(), *self.threshold.denom());
        for digits in 0..=18u32 {
            let scale = 10u64.pow(digits);
            if scale % d == 0 {
                let v = n * (scale / d);
                return if digits == 0 {
                    v.to_string()
                } else {
                    format!("{}.{:0width$}", v / scale, v % scale, width = digits as usize)
                };
            }
        }
        format_degree(self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustVerdict {
    #[serde(with = "degree_serde")]
    pub degree: Degree,
    pub accepted: bool,
    pub contributions: BTreeMap<Analyzer, u8>,
}

impl fmt::Display for TrustVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.accepted { "accepted" } else { "rejected" };
        write!(f, "{} ({}) {verdict}", self.degree, format_degree(self.degree))
    }
}

/// Degrees travel as `"n/d"` strings so no precision is lost.
pub mod degree_serde {
    use super::Degree;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Degree, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", d.numer(), d.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Degree, D::Error> {
        let raw = String::deserialize(d)?;
        parse(&raw).ok_or_else(|| serde::de::Error::custom(format!("bad degree `{raw}`")))
    }

    pub fn parse(raw: &str) -> Option<Degree> {
        let (n, d) = raw.split_once('/')?;
        let (n, d): (u64, u64) = (n.parse().ok()?, d.parse().ok()?);
        (d != 0).then(|| Degree::new(n, d))
    }
}

pub fn compute_trust(annotations: &Annotations, policy: &TrustPolicy) -> Result<TrustVerdict, TrustError> {
    let mut contributions = BTreeMap::new();
    for &a in &policy.roster {
        let label = annotations.get(a).ok_or(TrustError::MissingAnnotation(a))?;
        let favorable = policy.favorable.get(&a).is_some_and(|s| s.contains(&label));
        contributions.insert(a, u8::from(favorable));
    }
    let sum: u64 = contributions.values().map(|&c| u64::from(c)).sum();
    let degree = Ratio::new(sum, policy.roster.len() as u64);
    Ok(TrustVerdict {
        degree,
        accepted: degree > policy.threshold,
        contributions,
    })
}

/// Splits items into (trusted, untrusted), each paired with its verdict
/// and kept in input order.
#[allow(clippy::type_complexity)]
pub fn partition<T, F>(
    items: Vec<T>,
    annotations_of: F,
    policy: &TrustPolicy,
) -> Result<(Vec<(T, TrustVerdict)>, Vec<(T, TrustVerdict)>), TrustError>
where
    F: Fn(&T) -> &Annotations,
{
    let mut trusted = Vec::new();
    let mut untrusted = Vec::new();
    for item in items {
        let verdict = compute_trust(annotations_of(&item), policy)?;
        if verdict.accepted {
            trusted.push((item, verdict));
        } else {
            untrusted.push((item, verdict));
        }
    }
    Ok((trusted, untrusted))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrustStatistics {
    pub mean: Degree,
    pub min: Degree,
    pub max: Degree,
    pub accepted_fraction: Degree,
    pub count: usize,
}

/// `None` on an empty verdict set.
pub fn trust_statistics<'a, I>(verdicts: I) -> Option<TrustStatistics>
where
    I: IntoIterator<Item = &'a TrustVerdict>,
{
    let mut count = 0u64;
    let mut accepted = 0u64;
    let mut sum = Degree::from_integer(0);
    let mut min: Option<Degree> = None;
    let mut max: Option<Degree> = None;
    for v in verdicts {
        count += 1;
        accepted += u64::from(v.accepted);
        sum += v.degree;
        min = Some(min.map_or(v.degree, |m| m.min(v.degree)));
        max = Some(max.map_or(v.degree, |m| m.max(v.degree)));
    }
    Some(TrustStatistics {
        mean: sum / count.max(1),
        min: min?,
        max: max?,
        accepted_fraction: Ratio::new(accepted, count),
        count: count as usize,
    })
}
