//! Multidimensional patterns mined from analytic queries.
//!
//! A pattern is a star-schema sketch: a fact, the measures aggregated
//! over it, the GROUP BY dimensions and their attributes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::QueryType;
use crate::profiling::classify_query_type;
use crate::sparql::{local_name, AggregateArg, AggregateFn, ExprToken, ParsedQuery, Projection, ProjectionItem, Term};
use crate::text::{identifier_parts, jaccard};

pub const DEFAULT_SIMILARITY: f64 = 0.5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("aggregated variable ?{0} does not occur in the basic graph pattern")]
    UnboundAggregate(String),
    #[error("analytic query has no aggregate to use as a measure")]
    NoMeasure,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Measure {
    pub function: String,
    /// Variable name without `?`; `*` for `COUNT(*)`.
    pub variable: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MDPattern {
    pub fact: String,
    pub measures: Vec<Measure>,
    pub dimensions: Vec<String>,
    pub dimension_attributes: Vec<(String, String)>,
    /// Never populated; kept so the pattern mirrors the full MD vocabulary.
    pub fact_attributes: Vec<String>,
    pub source_query_id: String,
}

/// Aggregate calls of an expression: function plus first variable inside.
fn expression_measures(tokens: &[ExprToken], out: &mut Vec<Measure>) {
    for (i, w) in tokens.windows(2).enumerate() {
        let (ExprToken::Word(name), ExprToken::Punct(p)) = (&w[0], &w[1]) else {
            continue;
        };
        let Some(func) = AggregateFn::from_name(name).filter(|_| p == "(") else {
            continue;
        };
        let mut depth = 0usize;
        let mut variable = None;
        for t in &tokens[i + 1..] {
            match t {
                ExprToken::Punct(p) if p == "(" => depth += 1,
                ExprToken::Punct(p) if p == ")" => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                ExprToken::Var(v) if variable.is_none() => variable = Some(v.clone()),
                _ => {}
            }
        }
        out.push(Measure {
            function: func.as_str().to_string(),
            variable: variable.unwrap_or_else(|| "*".to_string()),
        });
    }
}

fn measures(q: &ParsedQuery) -> Vec<Measure> {
    let mut out = Vec::new();
    let Projection::Items(items) = &q.projection else {
        return out;
    };
    for item in items {
        match item {
            ProjectionItem::Aggregate { func, arg, .. } => {
                let mut inner = Vec::new();
                if let AggregateArg::Expr(e) = arg {
                    inner.extend(e.variables().map(str::to_string));
                }
                out.push(Measure {
                    function: func.as_str().to_string(),
                    variable: inner.into_iter().next().unwrap_or_else(|| "*".to_string()),
                });
            }
            ProjectionItem::Expr { expr, .. } => expression_measures(&expr.0, &mut out),
            ProjectionItem::Var(_) => {}
        }
    }
    out
}

/// `rdf:type` object of `var`, else the predicate of the first pattern
/// binding it, else the variable name itself.
fn fact_of(q: &ParsedQuery, var: &str) -> String {
    let bgp = q.bgp();
    let is_var = |t: &Term| t.as_variable() == Some(var);
    if let Some(class) = bgp
        .iter()
        .find(|t| t.is_type_pattern() && is_var(&t.subject))
        .and_then(|t| t.object.as_iri())
    {
        return local_name(class).to_string();
    }
    if let Some(pred) = bgp
        .iter()
        .filter(|t| !t.is_type_pattern())
        .find(|t| is_var(&t.subject) || is_var(&t.object))
        .and_then(|t| t.predicate.as_iri())
    {
        return local_name(pred).to_string();
    }
    var.to_string()
}

/// Fact of a `COUNT(*)`: the first typed subject's class, else the first
/// constant predicate.
fn fact_of_star(q: &ParsedQuery) -> String {
    let bgp = q.bgp();
    if let Some(class) = bgp.iter().find(|t| t.is_type_pattern()).and_then(|t| t.object.as_iri()) {
        return local_name(class).to_string();
    }
    bgp.iter()
        .find_map(|t| t.predicate.as_iri())
        .map_or_else(|| "*".to_string(), |p| local_name(p).to_string())
}

/// `None` for standard queries.
pub fn extract_md_pattern(q: &ParsedQuery, source_query_id: &str) -> Result<Option<MDPattern>, AnalyticsError> {
    if classify_query_type(q) == QueryType::Standard {
        return Ok(None);
    }
    let measures = measures(q);
    let Some(first) = measures.first() else {
        return Err(AnalyticsError::NoMeasure);
    };
    let bgp = q.bgp();
    for m in &measures {
        let bound = m.variable == "*"
            || bgp
                .iter()
                .flat_map(|t| t.terms())
                .any(|t| t.as_variable() == Some(m.variable.as_str()));
        if !bound {
            return Err(AnalyticsError::UnboundAggregate(m.variable.clone()));
        }
    }
    let fact = if first.variable == "*" {
        fact_of_star(q)
    } else {
        fact_of(q, &first.variable)
    };
    let mut dimensions: Vec<String> = Vec::new();
    for d in &q.group_by {
        if !dimensions.contains(d) {
            dimensions.push(d.clone());
        }
    }
    let mut dimension_attributes = Vec::new();
    for d in &dimensions {
        for t in &bgp {
            if t.subject.as_variable() != Some(d.as_str()) || t.is_type_pattern() {
                continue;
            }
            if let Some(p) = t.predicate.as_iri() {
                let pair = (d.clone(), local_name(p).to_string());
                if !dimension_attributes.contains(&pair) {
                    dimension_attributes.push(pair);
                }
            }
        }
    }
    Ok(Some(MDPattern {
        fact,
        measures,
        dimensions,
        dimension_attributes,
        fact_attributes: Vec::new(),
        source_query_id: source_query_id.to_string(),
    }))
}

fn pattern_tokens(p: &MDPattern) -> BTreeSet<String> {
    let mut out = identifier_parts(&p.fact);
    for d in &p.dimensions {
        out.extend(identifier_parts(d));
    }
    out
}

pub fn similarity(a: &MDPattern, b: &MDPattern) -> f64 {
    jaccard(&pattern_tokens(a), &pattern_tokens(b))
}

/// Single-link clusters of pattern indices. Groups are ordered by their
/// smallest member and list members ascending.
pub fn group_patterns(patterns: &[MDPattern], threshold: f64) -> Vec<Vec<usize>> {
    let tokens: Vec<_> = patterns.iter().map(pattern_tokens).collect();
    let mut parent: Vec<usize> = (0..patterns.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    for i in 0..patterns.len() {
        for j in i + 1..patterns.len() {
            if jaccard(&tokens[i], &tokens[j]) >= threshold {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..patterns.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}

/// Counts in the layout of a warehouse-design summary table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdSummary {
    pub facts: usize,
    pub dimensions: usize,
    pub dimension_attributes: usize,
    pub fact_attributes: usize,
    pub measures: usize,
}

impl fmt::Display for MdSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Facts {}", self.facts)?;
        writeln!(f, "Dimensions {}", self.dimensions)?;
        writeln!(f, "Dimension Attributes {}", self.dimension_attributes)?;
        writeln!(f, "Fact Attributes {}", self.fact_attributes)?;
        writeln!(f, "Measures {}", self.measures)
    }
}

/// One fact per group; dimensions and attributes counted distinct within
/// each group; measures counted as distinct (fact, function, variable).
pub fn md_summary(patterns: &[MDPattern], groups: &[Vec<usize>]) -> MdSummary {
    let mut s = MdSummary {
        facts: groups.len(),
        ..Default::default()
    };
    let mut measures = BTreeSet::new();
    for g in groups {
        let mut dims = BTreeSet::new();
        let mut attrs = BTreeSet::new();
        for &i in g {
            let p = &patterns[i];
            dims.extend(p.dimensions.iter());
            attrs.extend(p.dimension_attributes.iter());
            s.fact_attributes += p.fact_attributes.len();
            for m in &p.measures {
                measures.insert((&p.fact, &m.function, &m.variable));
            }
        }
        s.dimensions += dims.len();
        s.dimension_attributes += attrs.len();
    }
    s.measures = measures.len();
    s
}

/// Pattern with its group index, as written to the MD report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupedPattern {
    pub group: usize,
    #[serde(flatten)]
    pub pattern: MDPattern,
}

/// JSON lines, one pattern per line, in group order.
pub fn md_report(patterns: &[MDPattern], groups: &[Vec<usize>]) -> String {
    let mut out = String::new();
    for (g, members) in groups.iter().enumerate() {
        for &i in members {
            let rec = GroupedPattern {
                group: g,
                pattern: patterns[i].clone(),
            };
            out.push_str(&serde_json::to_string(&rec).expect("pattern serializes"));
            out.push('\n');
        }
    }
    out
}
