//! Serialization back to SPARQL text: a faithful form with full IRIs and a
//! canonical form used for duplicate detection.

use std::collections::HashMap;
use std::fmt::Write;

use super::ast::*;

/// Renames variables and blank nodes in first-occurrence order.
#[derive(Default)]
struct Renamer {
    vars: HashMap<String, String>,
    blanks: HashMap<String, String>,
}

impl Renamer {
    fn var(&mut self, v: &str) {
        let n = self.vars.len() + 1;
        self.vars.entry(v.to_string()).or_insert_with(|| format!("v{n}"));
    }

    fn blank(&mut self, b: &str) {
        let n = self.blanks.len() + 1;
        self.blanks.entry(b.to_string()).or_insert_with(|| format!("b{n}"));
    }

    fn term(&mut self, t: &Term) {
        match t {
            Term::Variable(v) => self.var(v),
            Term::Blank(b) => self.blank(b),
            _ => {}
        }
    }

    fn expr(&mut self, e: &Expression) {
        for t in &e.0 {
            match t {
                ExprToken::Var(v) => self.var(v),
                ExprToken::Blank(b) => self.blank(b),
                ExprToken::Pattern(g) => self.group(g),
                _ => {}
            }
        }
    }

    fn group(&mut self, g: &GroupPattern) {
        for el in &g.elements {
            match el {
                PatternElement::Triple(t) => t.terms().into_iter().for_each(|t| self.term(t)),
                PatternElement::Path { subject, path, object } => {
                    self.term(subject);
                    self.expr(path);
                    self.term(object);
                }
                PatternElement::Filter(e) => self.expr(e),
                PatternElement::Optional(g) | PatternElement::Group(g) => self.group(g),
                PatternElement::Union(gs) => gs.iter().for_each(|g| self.group(g)),
                PatternElement::SubSelect(q) => self.query(q),
            }
        }
    }

    fn query(&mut self, q: &ParsedQuery) {
        self.group(&q.where_clause);
        if let Projection::Items(items) = &q.projection {
            for item in items {
                match item {
                    ProjectionItem::Var(v) => self.var(v),
                    ProjectionItem::Aggregate { arg, alias, .. } => {
                        if let AggregateArg::Expr(e) = arg {
                            self.expr(e);
                        }
                        self.var(alias);
                    }
                    ProjectionItem::Expr { expr, alias } => {
                        self.expr(expr);
                        self.var(alias);
                    }
                }
            }
        }
        q.group_by.iter().for_each(|v| self.var(v));
        if let Some(h) = &q.having {
            self.expr(h);
        }
        if let Some(o) = &q.order_by {
            self.expr(o);
        }
        for t in &q.template {
            t.terms().into_iter().for_each(|t| self.term(t));
        }
    }
}

/// Sort key of a triple with unknowns masked, so that consistent renaming
/// never changes the order.
fn masked_key(t: &TriplePattern) -> (String, String, String) {
    let mask = |term: &Term| match term {
        Term::Variable(_) => "?".to_string(),
        Term::Blank(_) => "_:".to_string(),
        other => Writer::plain().term_string(other),
    };
    (mask(&t.predicate), mask(&t.subject), mask(&t.object))
}

fn sort_triples(triples: &mut [TriplePattern]) {
    triples.sort_by_cached_key(masked_key);
}

/// Sorts each maximal run of adjacent triple patterns; other elements
/// keep their relative position.
fn sort_group(g: &mut GroupPattern) {
    let mut i = 0;
    while i < g.elements.len() {
        if matches!(g.elements[i], PatternElement::Triple(_)) {
            let start = i;
            while i < g.elements.len() && matches!(g.elements[i], PatternElement::Triple(_)) {
                i += 1;
            }
            let mut run: Vec<TriplePattern> = g.elements[start..i]
                .iter()
                .map(|e| match e {
                    PatternElement::Triple(t) => t.clone(),
                    _ => unreachable!(),
                })
                .collect();
            sort_triples(&mut run);
            for (slot, t) in g.elements[start..i].iter_mut().zip(run) {
                *slot = PatternElement::Triple(t);
            }
        } else {
            match &mut g.elements[i] {
                PatternElement::Optional(inner) | PatternElement::Group(inner) => sort_group(inner),
                PatternElement::Union(gs) => gs.iter_mut().for_each(sort_group),
                PatternElement::SubSelect(q) => sort_query(q),
                PatternElement::Filter(e) => sort_expr(e),
                PatternElement::Path { .. } | PatternElement::Triple(_) => {}
            }
            i += 1;
        }
    }
}

fn sort_expr(e: &mut Expression) {
    for t in &mut e.0 {
        if let ExprToken::Pattern(g) = t {
            sort_group(g);
        }
    }
}

fn sort_query(q: &mut ParsedQuery) {
    sort_group(&mut q.where_clause);
    sort_triples(&mut q.template);
}

struct Writer<'a> {
    out: String,
    names: Option<&'a Renamer>,
}

impl<'a> Writer<'a> {
    fn plain() -> Writer<'static> {
        Writer {
            out: String::new(),
            names: None,
        }
    }

    fn push(&mut self, s: &str) {
        if !self.out.is_empty() && !self.out.ends_with(' ') {
            self.out.push(' ');
        }
        self.out.push_str(s);
    }

    fn var_name(&self, v: &str) -> String {
        match self.names {
            Some(r) => format!("?{}", r.vars.get(v).map_or(v, |s| s.as_str())),
            None => format!("?{v}"),
        }
    }

    fn blank_name(&self, b: &str) -> String {
        match self.names {
            Some(r) => format!("_:{}", r.blanks.get(b).map_or(b, |s| s.as_str())),
            None => format!("_:{b}"),
        }
    }

    fn literal_string(lit: &Literal) -> String {
        let mut s = String::from("\"");
        for c in lit.lexical.chars() {
            match c {
                '"' => s.push_str("\\\""),
                '\\' => s.push_str("\\\\"),
                '\n' => s.push_str("\\n"),
                '\r' => s.push_str("\\r"),
                '\t' => s.push_str("\\t"),
                c => s.push(c),
            }
        }
        s.push('"');
        if let Some(lang) = &lit.lang {
            let _ = write!(s, "@{lang}");
        } else if let Some(dt) = &lit.datatype {
            let _ = write!(s, "^^<{dt}>");
        }
        s
    }

    fn term_string(&self, t: &Term) -> String {
        match t {
            Term::Iri(i) => format!("<{i}>"),
            Term::Literal(l) => Self::literal_string(l),
            Term::Variable(v) => self.var_name(v),
            Term::Blank(b) => self.blank_name(b),
        }
    }

    fn term(&mut self, t: &Term) {
        let s = self.term_string(t);
        self.push(&s);
    }

    fn expr(&mut self, e: &Expression) {
        for t in &e.0 {
            match t {
                ExprToken::Var(v) => {
                    let s = self.var_name(v);
                    self.push(&s);
                }
                ExprToken::Iri(i) => self.push(&format!("<{i}>")),
                ExprToken::Blank(b) => {
                    let s = self.blank_name(b);
                    self.push(&s);
                }
                ExprToken::Literal(l) => self.push(&Self::literal_string(l)),
                ExprToken::Number(n) => self.push(n),
                ExprToken::Word(w) if w == "true" || w == "false" => self.push(w),
                ExprToken::Word(w) => self.push(&w.to_ascii_uppercase()),
                ExprToken::Punct(p) => self.push(p),
                ExprToken::Pattern(g) => self.group(g),
            }
        }
    }

    fn triple(&mut self, t: &TriplePattern) {
        self.term(&t.subject);
        self.term(&t.predicate);
        self.term(&t.object);
        self.push(".");
    }

    fn group(&mut self, g: &GroupPattern) {
        self.push("{");
        for el in &g.elements {
            match el {
                PatternElement::Triple(t) => self.triple(t),
                PatternElement::Path { subject, path, object } => {
                    self.term(subject);
                    self.expr(path);
                    self.term(object);
                    self.push(".");
                }
                PatternElement::Filter(e) => {
                    self.push("FILTER");
                    self.expr(e);
                }
                PatternElement::Optional(inner) => {
                    self.push("OPTIONAL");
                    self.group(inner);
                }
                PatternElement::Group(inner) => self.group(inner),
                PatternElement::Union(gs) => {
                    for (i, inner) in gs.iter().enumerate() {
                        if i > 0 {
                            self.push("UNION");
                        }
                        self.group(inner);
                    }
                }
                PatternElement::SubSelect(q) => {
                    self.push("{");
                    self.query_body(q);
                    self.push("}");
                }
            }
        }
        self.push("}");
    }

    fn query_body(&mut self, q: &ParsedQuery) {
        match q.form {
            QueryForm::Select => {
                self.push("SELECT");
                match q.modifier {
                    Some(SelectModifier::Distinct) => self.push("DISTINCT"),
                    Some(SelectModifier::Reduced) => self.push("REDUCED"),
                    None => {}
                }
                match &q.projection {
                    Projection::All => self.push("*"),
                    Projection::Items(items) => {
                        for item in items {
                            self.projection_item(item);
                        }
                    }
                }
            }
            QueryForm::Construct => {
                self.push("CONSTRUCT");
                self.push("{");
                for t in &q.template {
                    self.triple(t);
                }
                self.push("}");
            }
        }
        self.push("WHERE");
        self.group(&q.where_clause);
        if !q.group_by.is_empty() {
            self.push("GROUP BY");
            for v in &q.group_by {
                let s = self.var_name(v);
                self.push(&s);
            }
        }
        if let Some(h) = &q.having {
            self.push("HAVING");
            self.expr(h);
        }
        if let Some(o) = &q.order_by {
            self.push("ORDER BY");
            self.expr(o);
        }
        if let Some(l) = q.limit {
            self.push(&format!("LIMIT {l}"));
        }
        if let Some(o) = q.offset {
            self.push(&format!("OFFSET {o}"));
        }
    }

    fn projection_item(&mut self, item: &ProjectionItem) {
        match item {
            ProjectionItem::Var(v) => {
                let s = self.var_name(v);
                self.push(&s);
            }
            ProjectionItem::Aggregate {
                func,
                distinct,
                arg,
                alias,
            } => {
                self.push("(");
                self.push(func.as_str());
                self.push("(");
                if *distinct {
                    self.push("DISTINCT");
                }
                match arg {
                    AggregateArg::Star => self.push("*"),
                    AggregateArg::Expr(e) => self.expr(e),
                }
                self.push(")");
                self.push("AS");
                let s = self.var_name(alias);
                self.push(&s);
                self.push(")");
            }
            ProjectionItem::Expr { expr, alias } => {
                self.push("(");
                self.expr(expr);
                self.push("AS");
                let s = self.var_name(alias);
                self.push(&s);
                self.push(")");
            }
        }
    }
}

impl ParsedQuery {
    /// Serializes with full IRIs and the original variable names, keeping
    /// pattern order.
    pub fn to_sparql(&self) -> String {
        let mut w = Writer::plain();
        w.query_body(self);
        w.out
    }
}

/// Deterministic form shared by queries that differ only in whitespace,
/// keyword case, prefix usage, triple order within a block, or a
/// consistent renaming of variables and blank nodes.
pub fn canonicalize(q: &ParsedQuery) -> String {
    let mut sorted = q.clone();
    sort_query(&mut sorted);
    let mut names = Renamer::default();
    names.query(&sorted);
    let mut w = Writer {
        out: String::new(),
        names: Some(&names),
    };
    w.query_body(&sorted);
    w.out
}
