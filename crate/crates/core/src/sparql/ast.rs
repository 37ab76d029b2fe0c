use std::collections::BTreeMap;
use std::fmt;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub lexical: String,
    pub datatype: Option<String>,
    pub lang: Option<String>,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Self {
            lexical: lexical.into(),
            datatype: None,
            lang: None,
        }
    }
}

/// A node or predicate position of a triple pattern. IRIs are always
/// stored fully expanded.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Literal(Literal),
    Variable(String),
    Blank(String),
}

impl Term {
    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }

    /// Variables and blank nodes both behave as unknowns downstream.
    pub fn is_unbound(&self) -> bool {
        matches!(self, Term::Variable(_) | Term::Blank(_))
    }

    pub fn is_constant(&self) -> bool {
        !self.is_unbound()
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_variable(&self) -> Option<&str> {
        match self {
            Term::Variable(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl TriplePattern {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        Self {
            subject,
            predicate,
            object,
        }
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn is_type_pattern(&self) -> bool {
        self.predicate.as_iri() == Some(RDF_TYPE)
    }
}

/// Opaque expression kept as a token sequence so variables and IRIs can
/// still be renamed or expanded.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Expression(pub Vec<ExprToken>);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExprToken {
    Var(String),
    Iri(String),
    Blank(String),
    Literal(Literal),
    Number(String),
    /// Keyword or function name.
    Word(String),
    Punct(String),
    /// Graph pattern of an `EXISTS { ... }`.
    Pattern(GroupPattern),
}

impl Expression {
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.0.iter().filter_map(|t| match t {
            ExprToken::Var(v) => Some(v.as_str()),
            _ => None,
        })
    }

    /// True if the expression calls one of the aggregate functions.
    pub fn contains_aggregate(&self) -> bool {
        self.0.windows(2).any(|w| match (&w[0], &w[1]) {
            (ExprToken::Word(name), ExprToken::Punct(p)) => p == "(" && AggregateFn::from_name(name).is_some(),
            _ => false,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AggregateFn {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl AggregateFn {
    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "COUNT" => Some(AggregateFn::Count),
            "SUM" => Some(AggregateFn::Sum),
            "AVG" => Some(AggregateFn::Avg),
            "MIN" => Some(AggregateFn::Min),
            "MAX" => Some(AggregateFn::Max),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AggregateFn::Count => "COUNT",
            AggregateFn::Sum => "SUM",
            AggregateFn::Avg => "AVG",
            AggregateFn::Min => "MIN",
            AggregateFn::Max => "MAX",
        }
    }
}

impl fmt::Display for AggregateFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AggregateArg {
    Star,
    Expr(Expression),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProjectionItem {
    Var(String),
    Aggregate {
        func: AggregateFn,
        distinct: bool,
        arg: AggregateArg,
        alias: String,
    },
    Expr {
        expr: Expression,
        alias: String,
    },
}

impl ProjectionItem {
    pub fn alias(&self) -> Option<&str> {
        match self {
            ProjectionItem::Var(_) => None,
            ProjectionItem::Aggregate { alias, .. } | ProjectionItem::Expr { alias, .. } => Some(alias),
        }
    }

    pub fn is_aggregate(&self) -> bool {
        match self {
            ProjectionItem::Var(_) => false,
            ProjectionItem::Aggregate { .. } => true,
            ProjectionItem::Expr { expr, .. } => expr.contains_aggregate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Projection {
    All,
    Items(Vec<ProjectionItem>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryForm {
    Select,
    Construct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectModifier {
    Distinct,
    Reduced,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupPattern {
    pub elements: Vec<PatternElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternElement {
    Triple(TriplePattern),
    /// Triple whose predicate is a property path; the path is not expanded.
    Path {
        subject: Term,
        path: Expression,
        object: Term,
    },
    Filter(Expression),
    Optional(GroupPattern),
    Group(GroupPattern),
    Union(Vec<GroupPattern>),
    SubSelect(Box<ParsedQuery>),
}

/// Counts of the non-BGP features of a query, subqueries included.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Features {
    pub filters: usize,
    pub optionals: usize,
    pub unions: usize,
    pub subqueries: usize,
    pub property_paths: usize,
    pub aggregates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParsedQuery {
    pub form: QueryForm,
    pub modifier: Option<SelectModifier>,
    pub projection: Projection,
    /// CONSTRUCT template; empty for SELECT.
    pub template: Vec<TriplePattern>,
    pub where_clause: GroupPattern,
    pub group_by: Vec<String>,
    pub having: Option<Expression>,
    pub order_by: Option<Expression>,
    pub limit: Option<u64>,
    pub offset: Option<u64>,
    pub prefixes: BTreeMap<String, String>,
    pub base: Option<String>,
    /// Source text the query was parsed from.
    pub text: String,
}

impl GroupPattern {
    fn collect_bgp<'a>(&'a self, out: &mut Vec<&'a TriplePattern>) {
        for el in &self.elements {
            match el {
                PatternElement::Triple(t) => out.push(t),
                PatternElement::Optional(g) | PatternElement::Group(g) => g.collect_bgp(out),
                PatternElement::Union(gs) => gs.iter().for_each(|g| g.collect_bgp(out)),
                PatternElement::SubSelect(q) => q.where_clause.collect_bgp(out),
                PatternElement::Path { .. } | PatternElement::Filter(_) => {}
            }
        }
    }

    fn collect_features(&self, f: &mut Features) {
        for el in &self.elements {
            match el {
                PatternElement::Triple(_) => {}
                PatternElement::Path { .. } => f.property_paths += 1,
                PatternElement::Filter(_) => f.filters += 1,
                PatternElement::Optional(g) => {
                    f.optionals += 1;
                    g.collect_features(f);
                }
                PatternElement::Group(g) => g.collect_features(f),
                PatternElement::Union(gs) => {
                    f.unions += 1;
                    gs.iter().for_each(|g| g.collect_features(f));
                }
                PatternElement::SubSelect(q) => {
                    f.subqueries += 1;
                    q.collect_features(f);
                }
            }
        }
    }

    /// Variables bound by triples, paths and subquery projections.
    pub(crate) fn collect_bound_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        for el in &self.elements {
            match el {
                PatternElement::Triple(t) => out.extend(t.terms().iter().filter_map(|t| t.as_variable())),
                PatternElement::Path { subject, object, .. } => {
                    out.extend(subject.as_variable());
                    out.extend(object.as_variable());
                }
                PatternElement::Optional(g) | PatternElement::Group(g) => g.collect_bound_vars(out),
                PatternElement::Union(gs) => gs.iter().for_each(|g| g.collect_bound_vars(out)),
                PatternElement::SubSelect(q) => {
                    q.where_clause.collect_bound_vars(out);
                    if let Projection::Items(items) = &q.projection {
                        out.extend(items.iter().filter_map(|i| i.alias()));
                    }
                }
                PatternElement::Filter(_) => {}
            }
        }
    }
}

impl ParsedQuery {
    /// All triple patterns of the WHERE clause, flattened across OPTIONAL,
    /// nested groups, UNION branches and subqueries. Property-path
    /// triples and EXISTS patterns are not part of the BGP.
    pub fn bgp(&self) -> Vec<&TriplePattern> {
        let mut out = Vec::new();
        self.where_clause.collect_bgp(&mut out);
        out
    }

    pub fn features(&self) -> Features {
        let mut f = Features::default();
        self.collect_features(&mut f);
        f
    }

    fn collect_features(&self, f: &mut Features) {
        if let Projection::Items(items) = &self.projection {
            f.aggregates += items.iter().filter(|i| i.is_aggregate()).count();
        }
        self.where_clause.collect_features(f);
    }

    pub fn aggregates(&self) -> impl Iterator<Item = &ProjectionItem> {
        let items: &[ProjectionItem] = match &self.projection {
            Projection::Items(items) => items,
            Projection::All => &[],
        };
        items.iter().filter(|i| i.is_aggregate())
    }
}

/// Text after the last `#` or `/` of an IRI.
pub fn local_name(iri: &str) -> &str {
    let trimmed = iri.trim_end_matches(['/', '#']);
    match trimmed.rfind(['#', '/']) {
        Some(i) => &trimmed[i + 1..],
        None => trimmed,
    }
}

/// IRI up to and including its last `#` or `/`.
pub fn namespace(iri: &str) -> &str {
    match iri.rfind(['#', '/']) {
        Some(i) => &iri[..=i],
        None => iri,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_names() {
        assert_eq!(local_name("http://x/creator"), "creator");
        assert_eq!(local_name(RDF_TYPE), "type");
        assert_eq!(local_name("http://x/Thing/"), "Thing");
        assert_eq!(local_name("urn:isbn"), "urn:isbn");
    }

    #[test]
    fn namespaces() {
        assert_eq!(namespace("http://x.org/a/b"), "http://x.org/a/");
        assert_eq!(namespace(RDF_TYPE), "http://www.w3.org/1999/02/22-rdf-syntax-ns#");
    }
}
