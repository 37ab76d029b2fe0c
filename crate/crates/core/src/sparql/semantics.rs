//! Vocabulary checks and nearest-term repair of unknown IRIs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::correct::{CorrectionResult, CorrectionStatus};
use super::Vocabulary;

/// Largest normalized edit distance accepted for a replacement.
pub const SEMANTIC_DISTANCE_THRESHOLD: f64 = 0.34;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SemanticStatus {
    Correct,
    Wrong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationKind {
    UnknownPredicate,
    UnknownClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub term: String,
    pub reason: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticReport {
    pub status: SemanticStatus,
    pub violations: Vec<Violation>,
}

fn triple_violations(t: &TriplePattern, v: &Vocabulary) -> impl Iterator<Item = Violation> {
    let mut out = Vec::new();
    if let Some(p) = t.predicate.as_iri() {
        if p != RDF_TYPE && !v.predicates.contains(p) {
            out.push(Violation {
                term: p.to_string(),
                reason: ViolationKind::UnknownPredicate,
            });
        }
    }
    if t.is_type_pattern() {
        if let Some(c) = t.object.as_iri() {
            if !v.classes.contains(c) {
                out.push(Violation {
                    term: c.to_string(),
                    reason: ViolationKind::UnknownClass,
                });
            }
        }
    }
    out.into_iter()
}

/// Flags constant predicates absent from the vocabulary and `rdf:type`
/// objects that are not known classes. `rdf:type` itself is always known.
pub fn check_semantics(q: &ParsedQuery, v: &Vocabulary) -> SemanticReport {
    let mut violations: Vec<Violation> = Vec::new();
    for t in q.bgp() {
        for viol in triple_violations(t, v) {
            if !violations.contains(&viol) {
                violations.push(viol);
            }
        }
    }
    let status = if violations.is_empty() {
        SemanticStatus::Correct
    } else {
        SemanticStatus::Wrong
    };
    SemanticReport { status, violations }
}

/// Levenshtein distance over chars divided by the longer length.
pub fn normalized_distance(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 0.0;
    }
    strsim::levenshtein(a, b) as f64 / longest as f64
}

/// Vocabulary IRI whose local name is closest to `iri`'s, with its
/// distance. Ties go to the lexicographically smallest IRI.
pub fn nearest_term<'a, I>(iri: &str, candidates: I) -> Option<(&'a str, f64)>
where
    I: IntoIterator<Item = &'a String>,
{
    let name = local_name(iri);
    let mut best: Option<(&str, f64)> = None;
    for c in candidates {
        let d = normalized_distance(name, local_name(c));
        let better = match best {
            None => true,
            Some((b, bd)) => d < bd || (d == bd && c.as_str() < b),
        };
        if better {
            best = Some((c.as_str(), d));
        }
    }
    best
}

fn rewrite_group(g: &mut GroupPattern, preds: &BTreeMap<String, String>, classes: &BTreeMap<String, String>) {
    for el in &mut g.elements {
        match el {
            PatternElement::Triple(t) => rewrite_triple(t, preds, classes),
            PatternElement::Optional(inner) | PatternElement::Group(inner) => rewrite_group(inner, preds, classes),
            PatternElement::Union(gs) => gs.iter_mut().for_each(|g| rewrite_group(g, preds, classes)),
            PatternElement::SubSelect(q) => rewrite_group(&mut q.where_clause, preds, classes),
            PatternElement::Path { .. } | PatternElement::Filter(_) => {}
        }
    }
}

fn rewrite_triple(t: &mut TriplePattern, preds: &BTreeMap<String, String>, classes: &BTreeMap<String, String>) {
    let is_type = t.is_type_pattern();
    if let Term::Iri(p) = &mut t.predicate {
        if let Some(new) = preds.get(p.as_str()) {
            *p = new.clone();
        }
    }
    if is_type {
        if let Term::Iri(c) = &mut t.object {
            if let Some(new) = classes.get(c.as_str()) {
                *c = new.clone();
            }
        }
    }
}

/// Replaces each violating IRI by its nearest vocabulary term when that
/// term is within [`SEMANTIC_DISTANCE_THRESHOLD`].
pub fn correct_semantics(q: &ParsedQuery, v: &Vocabulary) -> (CorrectionResult, Option<ParsedQuery>) {
    let report = check_semantics(q, v);
    if report.status == SemanticStatus::Correct {
        return (
            CorrectionResult::unchanged(CorrectionStatus::AlreadyCorrect, &q.text),
            Some(q.clone()),
        );
    }
    let mut preds = BTreeMap::new();
    let mut classes = BTreeMap::new();
    for viol in &report.violations {
        let (pool, target) = match viol.reason {
            ViolationKind::UnknownPredicate => (&v.predicates, &mut preds),
            ViolationKind::UnknownClass => (&v.classes, &mut classes),
        };
        match nearest_term(&viol.term, pool) {
            Some((best, d)) if d <= SEMANTIC_DISTANCE_THRESHOLD => {
                target.insert(viol.term.clone(), best.to_string());
            }
            _ => {
                return (
                    CorrectionResult::unchanged(CorrectionStatus::Uncorrectable, &q.text),
                    None,
                )
            }
        }
    }
    let mut fixed = q.clone();
    rewrite_group(&mut fixed.where_clause, &preds, &classes);
    for t in &mut fixed.template {
        rewrite_triple(t, &preds, &classes);
    }
    fixed.text = fixed.to_sparql();
    debug_assert_eq!(check_semantics(&fixed, v).status, SemanticStatus::Correct);
    (
        CorrectionResult {
            status: CorrectionStatus::Corrected,
            text: fixed.text.clone(),
            applied: vec!["nearest-vocabulary-term"],
        },
        Some(fixed),
    )
}
