//! Single-query quality analyzers.

use crate::labels::{Expertise, QueryType, Schema};
use crate::sparql::ParsedQuery;

pub fn classify_query_type(q: &ParsedQuery) -> QueryType {
    if q.aggregates().next().is_some() || !q.group_by.is_empty() {
        QueryType::Analytic
    } else {
        QueryType::Standard
    }
}

/// Weights and cutoffs of the expertise score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpertiseConfig {
    pub pattern_weight: usize,
    /// Per OPTIONAL and per FILTER.
    pub clause_weight: usize,
    /// Per subquery, property path and aggregate.
    pub advanced_weight: usize,
    pub beginner_max: usize,
    pub expert_min: usize,
}

impl Default for ExpertiseConfig {
    fn default() -> Self {
        Self {
            pattern_weight: 1,
            clause_weight: 2,
            advanced_weight: 3,
            beginner_max: 3,
            expert_min: 10,
        }
    }
}

pub fn expertise_score(q: &ParsedQuery, cfg: &ExpertiseConfig) -> usize {
    let f = q.features();
    cfg.pattern_weight * q.bgp().len()
        + cfg.clause_weight * (f.optionals + f.filters)
        + cfg.advanced_weight * (f.subqueries + f.property_paths + f.aggregates)
}

pub fn classify_expertise(q: &ParsedQuery, cfg: &ExpertiseConfig) -> Expertise {
    let f = q.features();
    let score = expertise_score(q, cfg);
    if score >= cfg.expert_min || f.subqueries > 0 || f.property_paths > 0 {
        Expertise::Expert
    } else if score <= cfg.beginner_max {
        Expertise::Beginner
    } else {
        Expertise::Intermediate
    }
}

/// At least a third of the BGP positions are constants and some
/// predicate is a constant IRI.
pub fn classify_schema_informativeness(q: &ParsedQuery) -> Schema {
    let bgp = q.bgp();
    let constants = bgp.iter().flat_map(|t| t.terms()).filter(|t| t.is_constant()).count();
    let iri_predicate = bgp.iter().any(|t| t.predicate.as_iri().is_some());
    if !bgp.is_empty() && constants >= bgp.len() && iri_predicate {
        Schema::Informative
    } else {
        Schema::NonInformative
    }
}
