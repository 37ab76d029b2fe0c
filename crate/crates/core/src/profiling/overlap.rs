//! Interaction between two curated logs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::labels::Topic;
use crate::sparql::{namespace, ParsedQuery, Term};
use crate::text::jaccard;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LogSummary {
    /// `Topic::None` is never stored.
    pub topics: BTreeSet<Topic>,
    pub namespaces: BTreeSet<String>,
}

impl LogSummary {
    pub fn add_topic(&mut self, t: Topic) {
        if t != Topic::None {
            self.topics.insert(t);
        }
    }

    /// Records the namespace of every constant IRI of the BGP.
    pub fn add_query(&mut self, q: &ParsedQuery) {
        for t in q.bgp().into_iter().flat_map(|t| t.terms()) {
            if let Term::Iri(iri) = t {
                self.namespaces.insert(namespace(iri).to_string());
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub semantic_overlap: f64,
    pub source_overlap: f64,
}

pub fn log_overlap(a: &LogSummary, b: &LogSummary) -> Overlap {
    Overlap {
        semantic_overlap: jaccard(&a.topics, &b.topics),
        source_overlap: jaccard(&a.namespaces, &b.namespaces),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(topics: &[Topic], ns: &[&str]) -> LogSummary {
        let mut s = LogSummary::default();
        topics.iter().for_each(|&t| s.add_topic(t));
        s.namespaces = ns.iter().map(|n| n.to_string()).collect();
        s
    }

    #[test]
    fn identical_and_disjoint() {
        let a = summary(&[Topic::Publication], &["http://x/"]);
        let b = summary(&[Topic::Role], &["http://y/"]);
        assert_eq!(
            log_overlap(&a, &a),
            Overlap {
                semantic_overlap: 1.0,
                source_overlap: 1.0
            }
        );
        assert_eq!(
            log_overlap(&a, &b),
            Overlap {
                semantic_overlap: 0.0,
                source_overlap: 0.0
            }
        );
    }

    #[test]
    fn one_third() {
        let a = summary(&[Topic::Publication, Topic::Role, Topic::None], &[]);
        let b = summary(&[Topic::Publication, Topic::Site], &[]);
        assert!((log_overlap(&a, &b).semantic_overlap - 1.0 / 3.0).abs() < 1e-12);
    }
}
