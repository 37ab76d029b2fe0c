//! Per-analyzer label counts over a whole log.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::labels::{Analyzer, Annotations, Duplication, Label};
use crate::trust::{degree_serde, format_degree, Degree, TrustStatistics};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("query {index} has no `{analyzer}` annotation")]
    MissingAnnotation { index: usize, analyzer: Analyzer },
    #[error("report line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileReport {
    pub total: usize,
    /// Every label of every analyzer, zero counts included.
    pub counts: BTreeMap<Analyzer, BTreeMap<Label, usize>>,
    pub trust: Option<TrustStatistics>,
}

impl ProfileReport {
    pub fn empty() -> Self {
        let counts = Analyzer::ALL
            .iter()
            .map(|&a| (a, a.labels().into_iter().map(|l| (l, 0)).collect()))
            .collect();
        Self {
            total: 0,
            counts,
            trust: None,
        }
    }

    pub fn count(&self, label: Label) -> usize {
        self.counts[&label.analyzer()][&label]
    }

    pub fn duplication_rate(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.count(Label::Duplication(Duplication::Duplicate)) as f64 / self.total as f64
    }

    /// One `count <analyzer> <label> <n>` line per label, preceded by the
    /// total and the duplication rate, followed by trust lines when known.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "total {}", self.total).unwrap();
        writeln!(out, "duplication_rate {:.4}", self.duplication_rate()).unwrap();
        for (a, labels) in &self.counts {
            for (l, n) in labels {
                writeln!(out, "count {} {} {}", a, l.as_str(), n).unwrap();
            }
        }
        if let Some(t) = &self.trust {
            let line = |out: &mut String, key: &str, d: Degree| {
                writeln!(out, "{key} {}/{} {}", d.numer(), d.denom(), format_degree(d)).unwrap()
            };
            line(&mut out, "trust_mean", t.mean);
            line(&mut out, "trust_min", t.min);
            line(&mut out, "trust_max", t.max);
            line(&mut out, "trust_accepted_fraction", t.accepted_fraction);
        }
        out
    }

    /// Plot-ready `analyzer,label,count` table.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["analyzer", "label", "count"]).unwrap();
        for (a, labels) in &self.counts {
            for (l, n) in labels {
                w.write_record([a.as_str(), l.as_str(), &n.to_string()]).unwrap();
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
    }

    /// Reads back the output of [`ProfileReport::to_text`].
    pub fn from_text(src: &str) -> Result<Self, ReportError> {
        let mut report = Self::empty();
        let mut trust: BTreeMap<&str, Degree> = BTreeMap::new();
        for (i, line) in src.lines().enumerate() {
            let err = |reason: &str| ReportError::Syntax {
                line: i + 1,
                reason: reason.to_string(),
            };
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                [] => {}
                ["total", n] => report.total = n.parse().map_err(|_| err("bad total"))?,
                ["duplication_rate", _] => {}
                ["count", a, l, n] => {
                    let analyzer: Analyzer = a.parse().map_err(|_| err("unknown analyzer"))?;
                    let label = analyzer.parse_label(l).map_err(|_| err("unknown label"))?;
                    let n = n.parse().map_err(|_| err("bad count"))?;
                    report.counts.get_mut(&analyzer).unwrap().insert(label, n);
                }
                [key, frac, _] if key.starts_with("trust_") => {
                    let d = degree_serde::parse(frac).ok_or_else(|| err("bad fraction"))?;
                    trust.insert(key, d);
                }
                _ => return Err(err("unrecognized line")),
            }
        }
        if !trust.is_empty() {
            let get = |k: &str| {
                trust.get(k).copied().ok_or(ReportError::Syntax {
                    line: 0,
                    reason: format!("missing {k}"),
                })
            };
            let fraction = get("trust_accepted_fraction")?;
            report.trust = Some(TrustStatistics {
                mean: get("trust_mean")?,
                min: get("trust_min")?,
                max: get("trust_max")?,
                accepted_fraction: fraction,
                count: report.total,
            });
        }
        Ok(report)
    }
}

/// Counts every (analyzer, label) pair; each query must carry a label
/// for every analyzer.
pub fn profile<'a, I>(annotated: I, trust: Option<TrustStatistics>) -> Result<ProfileReport, ReportError>
where
    I: IntoIterator<Item = &'a Annotations>,
{
    let mut report = ProfileReport::empty();
    for (index, ann) in annotated.into_iter().enumerate() {
        for analyzer in Analyzer::ALL {
            let label = ann
                .get(analyzer)
                .ok_or(ReportError::MissingAnnotation { index, analyzer })?;
            *report.counts.get_mut(&analyzer).unwrap().get_mut(&label).unwrap() += 1;
        }
        report.total += 1;
    }
    report.trust = trust;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::*;

    fn sample(dup: Duplication) -> Annotations {
        Analyzer::ALL
            .iter()
            .map(|a| match a {
                Analyzer::Duplication => Label::Duplication(dup),
                other => other.labels()[0],
            })
            .collect()
    }

    #[test]
    fn empty_report_lists_everything_at_zero() {
        let r = profile(std::iter::empty(), None).unwrap();
        let text = r.to_text();
        assert!(text.contains("count shape Forrest 0"));
        assert!(text.contains("count query_type Standard 0"));
        assert!(text.starts_with("total 0\nduplication_rate 0.0000\n"));
    }

    #[test]
    fn counts_sum_to_total() {
        let ann = vec![
            sample(Duplication::Unique),
            sample(Duplication::Duplicate),
            sample(Duplication::Unique),
        ];
        let r = profile(&ann, None).unwrap();
        for labels in r.counts.values() {
            assert_eq!(labels.values().sum::<usize>(), 3);
        }
        assert!((r.duplication_rate() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(ProfileReport::from_text(&r.to_text()).unwrap(), r);
    }

    #[test]
    fn missing_label_is_reported() {
        let a: Annotations = [Label::Behavior(Behavior::Robot)].into_iter().collect();
        assert!(matches!(
            profile([&a], None),
            Err(ReportError::MissingAnnotation { index: 0, .. })
        ));
    }

    #[test]
    fn csv_has_header_and_one_row_per_label() {
        let r = ProfileReport::empty();
        let csv = r.to_csv();
        let rows = csv.lines().count();
        let labels: usize = Analyzer::ALL.iter().map(|a| a.labels().len()).sum();
        assert_eq!(rows, labels + 1);
        assert!(csv.starts_with("analyzer,label,count\n"));
    }
}
