//! Recursive-descent parser for SELECT/CONSTRUCT queries.

use std::collections::BTreeMap;

use super::ast::*;
use super::lexer::{tokenize, Spanned, Tok};
use super::SyntaxDiagnosis;

const KEYWORDS_ENDING_ORDER: &[&str] = &["LIMIT", "OFFSET"];

struct Parser<'a> {
    toks: Vec<Spanned>,
    idx: usize,
    src_len: usize,
    prefixes: BTreeMap<String, String>,
    base: Option<String>,
    anon: usize,
    text: &'a str,
}

type PResult<T> = Result<T, SyntaxDiagnosis>;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|s| &s.tok)
    }

    fn peek_n(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.idx + n).map(|s| &s.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.src_len, |s| s.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|s| s.tok.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> SyntaxDiagnosis {
        let found = self.peek().map(Tok::describe).unwrap_or_else(|| "end of input".into());
        SyntaxDiagnosis::new(self.pos(), expected, found)
    }

    fn at_word(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is_word(kw))
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(p))
    }

    fn eat_word(&mut self, kw: &str) -> bool {
        if self.at_word(kw) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err(p))
        }
    }

    fn expect_word(&mut self, kw: &str) -> PResult<()> {
        if self.eat_word(kw) {
            Ok(())
        } else {
            Err(self.err(kw))
        }
    }

    fn expect_var(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Var(v)) => {
                let v = v.clone();
                self.idx += 1;
                Ok(v)
            }
            _ => Err(self.err("variable")),
        }
    }

    fn resolve_iri(&self, iri: &str) -> String {
        match &self.base {
            Some(base) if !iri.contains(':') => url::Url::parse(base)
                .and_then(|b| b.join(iri))
                .map(|u| u.to_string())
                .unwrap_or_else(|_| format!("{base}{iri}")),
            _ => iri.to_string(),
        }
    }

    fn expand(&self, prefix: &str, local: &str) -> PResult<String> {
        match self.prefixes.get(prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => Err(SyntaxDiagnosis::new(
                self.toks[self.idx.saturating_sub(1)].pos,
                "declared prefix",
                format!("{prefix}:"),
            )),
        }
    }

    fn prologue(&mut self) -> PResult<()> {
        loop {
            if self.eat_word("PREFIX") {
                let (prefix, local) = match self.next() {
                    Some(Tok::PName { prefix, local }) => (prefix, local),
                    _ => {
                        self.idx = self.idx.saturating_sub(1);
                        return Err(self.err("prefix name"));
                    }
                };
                if !local.is_empty() {
                    return Err(SyntaxDiagnosis::new(
                        self.pos(),
                        "prefix name",
                        format!("{prefix}:{local}"),
                    ));
                }
                let iri = match self.next() {
                    Some(Tok::IriRef(i)) => i,
                    _ => {
                        self.idx = self.idx.saturating_sub(1);
                        return Err(self.err("IRI"));
                    }
                };
                let iri = self.resolve_iri(&iri);
                self.prefixes.insert(prefix, iri);
            } else if self.eat_word("BASE") {
                match self.next() {
                    Some(Tok::IriRef(i)) => self.base = Some(i),
                    _ => {
                        self.idx = self.idx.saturating_sub(1);
                        return Err(self.err("IRI"));
                    }
                }
            } else {
                return Ok(());
            }
        }
    }

    fn query(&mut self) -> PResult<ParsedQuery> {
        self.prologue()?;
        let q = if self.at_word("SELECT") {
            self.select_query()?
        } else if self.at_word("CONSTRUCT") {
            self.construct_query()?
        } else {
            return Err(self.err("SELECT or CONSTRUCT"));
        };
        if self.peek().is_some() {
            return Err(self.err("end of query"));
        }
        Ok(q)
    }

    fn empty_query(&self, form: QueryForm) -> ParsedQuery {
        ParsedQuery {
            form,
            modifier: None,
            projection: Projection::All,
            template: Vec::new(),
            where_clause: GroupPattern::default(),
            group_by: Vec::new(),
            having: None,
            order_by: None,
            limit: None,
            offset: None,
            prefixes: BTreeMap::new(),
            base: None,
            text: String::new(),
        }
    }

    fn select_query(&mut self) -> PResult<ParsedQuery> {
        self.expect_word("SELECT")?;
        let mut q = self.empty_query(QueryForm::Select);
        if self.eat_word("DISTINCT") {
            q.modifier = Some(SelectModifier::Distinct);
        } else if self.eat_word("REDUCED") {
            q.modifier = Some(SelectModifier::Reduced);
        }
        q.projection = self.projection()?;
        self.eat_word("WHERE");
        q.where_clause = self.group_pattern()?;
        self.solution_modifiers(&mut q)?;
        Ok(q)
    }

    fn construct_query(&mut self) -> PResult<ParsedQuery> {
        self.expect_word("CONSTRUCT")?;
        let mut q = self.empty_query(QueryForm::Construct);
        if self.at_word("WHERE") {
            // CONSTRUCT WHERE { triples }: template equals the pattern.
            self.idx += 1;
            self.expect_punct("{")?;
            let mut els = Vec::new();
            while !self.at_punct("}") {
                if self.peek().is_none() {
                    return Err(self.err("}"));
                }
                self.triples_same_subject(&mut els)?;
                if !self.eat_punct(".") && !self.at_punct("}") {
                    return Err(self.err("."));
                }
            }
            self.idx += 1;
            q.template = els
                .iter()
                .filter_map(|e| match e {
                    PatternElement::Triple(t) => Some(t.clone()),
                    _ => None,
                })
                .collect();
            if q.template.len() != els.len() {
                return Err(self.err("plain triple patterns in CONSTRUCT WHERE"));
            }
            q.where_clause = GroupPattern { elements: els };
        } else {
            q.template = self.construct_template()?;
            self.eat_word("WHERE");
            q.where_clause = self.group_pattern()?;
        }
        self.solution_modifiers(&mut q)?;
        Ok(q)
    }

    fn construct_template(&mut self) -> PResult<Vec<TriplePattern>> {
        self.expect_punct("{")?;
        let mut els = Vec::new();
        while !self.eat_punct("}") {
            if self.peek().is_none() {
                return Err(self.err("}"));
            }
            self.triples_same_subject(&mut els)?;
            if !self.eat_punct(".") && !self.at_punct("}") {
                return Err(self.err("."));
            }
        }
        els.into_iter()
            .map(|e| match e {
                PatternElement::Triple(t) => Ok(t),
                _ => Err(self.err("plain triple pattern in template")),
            })
            .collect()
    }

    fn projection(&mut self) -> PResult<Projection> {
        if self.eat_punct("*") {
            return Ok(Projection::All);
        }
        let mut items = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Var(v)) => {
                    items.push(ProjectionItem::Var(v.clone()));
                    self.idx += 1;
                }
                Some(Tok::Punct("(")) => items.push(self.projection_expr()?),
                _ => break,
            }
        }
        if items.is_empty() {
            return Err(self.err("projection variable or *"));
        }
        Ok(Projection::Items(items))
    }

    /// `( expr AS ?alias )`
    fn projection_expr(&mut self) -> PResult<ProjectionItem> {
        self.expect_punct("(")?;
        let mut toks = Vec::new();
        let mut depth = 0usize;
        loop {
            match self.peek() {
                None => return Err(self.err("AS")),
                Some(t) if depth == 0 && t.is_word("AS") => break,
                Some(Tok::Punct("(")) => depth += 1,
                Some(Tok::Punct(")")) => {
                    if depth == 0 {
                        return Err(self.err("AS"));
                    }
                    depth -= 1;
                }
                _ => {}
            }
            toks.push(self.expr_token()?);
        }
        self.expect_word("AS")?;
        let alias = self.expect_var()?;
        self.expect_punct(")")?;
        if toks.is_empty() {
            return Err(self.err("expression"));
        }
        Ok(classify_projection(Expression(toks), alias))
    }

    fn solution_modifiers(&mut self, q: &mut ParsedQuery) -> PResult<()> {
        if self.eat_word("GROUP") {
            self.expect_word("BY")?;
            while let Some(Tok::Var(v)) = self.peek() {
                q.group_by.push(v.clone());
                self.idx += 1;
            }
            if q.group_by.is_empty() {
                return Err(self.err("variable"));
            }
        }
        if self.eat_word("HAVING") {
            let mut toks = Vec::new();
            while self.at_punct("(") || matches!(self.peek(), Some(Tok::Word(w)) if !is_clause_keyword(w)) {
                self.constraint(&mut toks)?;
            }
            if toks.is_empty() {
                return Err(self.err("constraint"));
            }
            q.having = Some(Expression(toks));
        }
        if self.eat_word("ORDER") {
            self.expect_word("BY")?;
            let mut toks = Vec::new();
            loop {
                match self.peek() {
                    Some(Tok::Var(_)) => toks.push(self.expr_token()?),
                    Some(Tok::Punct("(")) => self.constraint(&mut toks)?,
                    Some(Tok::Word(w)) if !is_clause_keyword(w) => self.constraint(&mut toks)?,
                    _ => break,
                }
            }
            if toks.is_empty() {
                return Err(self.err("order condition"));
            }
            q.order_by = Some(Expression(toks));
        }
        loop {
            if self.eat_word("LIMIT") {
                if q.limit.is_some() {
                    return Err(self.err("single LIMIT"));
                }
                q.limit = Some(self.integer()?);
            } else if self.eat_word("OFFSET") {
                if q.offset.is_some() {
                    return Err(self.err("single OFFSET"));
                }
                q.offset = Some(self.integer()?);
            } else {
                return Ok(());
            }
        }
    }

    fn integer(&mut self) -> PResult<u64> {
        match self.peek() {
            Some(Tok::Number(n)) => {
                let v = n.parse().map_err(|_| self.err("integer"))?;
                self.idx += 1;
                Ok(v)
            }
            _ => Err(self.err("integer")),
        }
    }

    fn group_pattern(&mut self) -> PResult<GroupPattern> {
        self.expect_punct("{")?;
        if self.at_word("SELECT") {
            let sub = self.sub_select()?;
            self.expect_punct("}")?;
            return Ok(GroupPattern {
                elements: vec![PatternElement::SubSelect(Box::new(sub))],
            });
        }
        let mut elements = Vec::new();
        loop {
            match self.peek() {
                None => return Err(self.err("}")),
                Some(Tok::Punct("}")) => {
                    self.idx += 1;
                    return Ok(GroupPattern { elements });
                }
                Some(t) if t.is_word("FILTER") => {
                    self.idx += 1;
                    let mut toks = Vec::new();
                    self.constraint(&mut toks)?;
                    elements.push(PatternElement::Filter(Expression(toks)));
                    self.eat_punct(".");
                }
                Some(t) if t.is_word("OPTIONAL") => {
                    self.idx += 1;
                    elements.push(PatternElement::Optional(self.group_pattern()?));
                    self.eat_punct(".");
                }
                Some(Tok::Punct("{")) => {
                    if self.peek_n(1).is_some_and(|t| t.is_word("SELECT")) {
                        self.idx += 1;
                        let sub = self.sub_select()?;
                        self.expect_punct("}")?;
                        elements.push(PatternElement::SubSelect(Box::new(sub)));
                    } else {
                        let first = self.group_pattern()?;
                        if self.at_word("UNION") {
                            let mut branches = vec![first];
                            while self.eat_word("UNION") {
                                branches.push(self.group_pattern()?);
                            }
                            elements.push(PatternElement::Union(branches));
                        } else {
                            elements.push(PatternElement::Group(first));
                        }
                    }
                    self.eat_punct(".");
                }
                Some(_) => {
                    self.triples_same_subject(&mut elements)?;
                    if !self.eat_punct(".") && !self.at_group_element_start() {
                        return Err(self.err("}"));
                    }
                }
            }
        }
    }

    fn at_group_element_start(&self) -> bool {
        self.at_punct("}") || self.at_punct("{") || self.at_word("FILTER") || self.at_word("OPTIONAL")
    }

    fn sub_select(&mut self) -> PResult<ParsedQuery> {
        self.select_query()
    }

    /// A FILTER/HAVING/ORDER BY constraint: bracketed expression, function
    /// call, or `[NOT] EXISTS { ... }`.
    fn constraint(&mut self, out: &mut Vec<ExprToken>) -> PResult<()> {
        match self.peek() {
            Some(Tok::Punct("(")) => self.balanced(out),
            Some(t) if t.is_word("NOT") || t.is_word("EXISTS") => {
                if self.eat_word("NOT") {
                    out.push(ExprToken::Word("NOT".into()));
                }
                self.expect_word("EXISTS")?;
                out.push(ExprToken::Word("EXISTS".into()));
                out.push(ExprToken::Pattern(self.group_pattern()?));
                Ok(())
            }
            Some(Tok::Word(_)) => {
                out.push(self.expr_token()?);
                if !self.at_punct("(") {
                    return Err(self.err("("));
                }
                self.balanced(out)
            }
            Some(Tok::PName { .. }) | Some(Tok::IriRef(_)) => {
                out.push(self.expr_token()?);
                self.balanced(out)
            }
            _ => Err(self.err("(")),
        }
    }

    /// Consumes `( ... )` with nesting.
    fn balanced(&mut self, out: &mut Vec<ExprToken>) -> PResult<()> {
        self.expect_punct("(")?;
        out.push(ExprToken::Punct("(".into()));
        let mut depth = 1usize;
        while depth > 0 {
            match self.peek() {
                None => return Err(self.err(")")),
                Some(Tok::Punct("(")) => depth += 1,
                Some(Tok::Punct(")")) => depth -= 1,
                Some(Tok::Punct("{")) | Some(Tok::Punct("}")) => return Err(self.err(")")),
                Some(t) if t.is_word("EXISTS") => {
                    self.idx += 1;
                    out.push(ExprToken::Word("EXISTS".into()));
                    out.push(ExprToken::Pattern(self.group_pattern()?));
                    continue;
                }
                _ => {}
            }
            out.push(self.expr_token()?);
        }
        Ok(())
    }

    fn expr_token(&mut self) -> PResult<ExprToken> {
        let tok = self.next().ok_or_else(|| self.err("expression"))?;
        Ok(match tok {
            Tok::Var(v) => ExprToken::Var(v),
            Tok::IriRef(i) => ExprToken::Iri(self.resolve_iri(&i)),
            Tok::PName { prefix, local } => ExprToken::Iri(self.expand(&prefix, &local)?),
            Tok::Blank(b) => ExprToken::Blank(b),
            Tok::Str(s) => {
                let lit = self.literal_suffix(s)?;
                ExprToken::Literal(lit)
            }
            Tok::LangTag(_) => {
                self.idx -= 1;
                return Err(self.err("expression"));
            }
            Tok::Number(n) => ExprToken::Number(n),
            Tok::Word(w) => ExprToken::Word(w),
            Tok::Punct(p) => ExprToken::Punct(p.to_string()),
        })
    }

    fn literal_suffix(&mut self, lexical: String) -> PResult<Literal> {
        let mut lit = Literal::plain(lexical);
        match self.peek() {
            Some(Tok::LangTag(l)) => {
                lit.lang = Some(l.to_ascii_lowercase());
                self.idx += 1;
            }
            Some(Tok::Punct("^^")) => {
                self.idx += 1;
                lit.datatype = Some(match self.next() {
                    Some(Tok::IriRef(i)) => self.resolve_iri(&i),
                    Some(Tok::PName { prefix, local }) => self.expand(&prefix, &local)?,
                    _ => {
                        self.idx = self.idx.saturating_sub(1);
                        return Err(self.err("datatype IRI"));
                    }
                });
            }
            _ => {}
        }
        Ok(lit)
    }

    fn fresh_blank(&mut self) -> String {
        self.anon += 1;
        format!("_anon{}", self.anon)
    }

    fn term(&mut self, role: &str) -> PResult<Term> {
        let start = self.idx;
        let tok = self.next().ok_or_else(|| self.err(role))?;
        let term = match tok {
            Tok::Var(v) => Term::Variable(v),
            Tok::IriRef(i) => Term::Iri(self.resolve_iri(&i)),
            Tok::PName { prefix, local } => Term::Iri(self.expand(&prefix, &local)?),
            Tok::Blank(b) => Term::Blank(b),
            Tok::Punct("[") => {
                if !self.eat_punct("]") {
                    return Err(self.err("]"));
                }
                Term::Blank(self.fresh_blank())
            }
            Tok::Str(s) => Term::Literal(self.literal_suffix(s)?),
            Tok::Number(n) => Term::Literal(numeric_literal(&n)),
            Tok::Punct(sign @ ("+" | "-")) => match self.next() {
                Some(Tok::Number(n)) => {
                    let signed = if sign == "-" { format!("-{n}") } else { n };
                    Term::Literal(numeric_literal(&signed))
                }
                _ => {
                    self.idx = start;
                    return Err(self.err(role));
                }
            },
            Tok::Word(w) if w == "true" || w == "false" => Term::Literal(Literal {
                lexical: w,
                datatype: Some(format!("{XSD}boolean")),
                lang: None,
            }),
            _ => {
                self.idx = start;
                return Err(self.err(role));
            }
        };
        Ok(term)
    }

    fn triples_same_subject(&mut self, out: &mut Vec<PatternElement>) -> PResult<()> {
        let subject_pos = self.idx;
        let subject = self.term("triple pattern subject")?;
        if matches!(subject, Term::Literal(_)) {
            self.idx = subject_pos;
            return Err(self.err("subject term"));
        }
        loop {
            let verb = self.verb()?;
            loop {
                let object = self.term("object term")?;
                out.push(match &verb {
                    Verb::Term(p) => PatternElement::Triple(TriplePattern::new(subject.clone(), p.clone(), object)),
                    Verb::Path(path) => PatternElement::Path {
                        subject: subject.clone(),
                        path: path.clone(),
                        object,
                    },
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
            if !self.eat_punct(";") {
                return Ok(());
            }
            while self.eat_punct(";") {}
            if self.at_punct(".") || self.at_punct("}") {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> PResult<Verb> {
        match self.peek() {
            Some(Tok::Var(v)) => {
                let v = v.clone();
                self.idx += 1;
                Ok(Verb::Term(Term::Variable(v)))
            }
            _ => {
                let start = self.idx;
                let mut toks = Vec::new();
                self.path_alternative(&mut toks)?;
                if self.idx == start {
                    return Err(self.err("predicate"));
                }
                if let [ExprToken::Iri(i)] = toks.as_slice() {
                    Ok(Verb::Term(Term::Iri(i.clone())))
                } else {
                    Ok(Verb::Path(Expression(toks)))
                }
            }
        }
    }

    fn path_alternative(&mut self, out: &mut Vec<ExprToken>) -> PResult<()> {
        self.path_sequence(out)?;
        while self.eat_punct("|") {
            out.push(ExprToken::Punct("|".into()));
            self.path_sequence(out)?;
        }
        Ok(())
    }

    fn path_sequence(&mut self, out: &mut Vec<ExprToken>) -> PResult<()> {
        self.path_elt(out)?;
        while self.eat_punct("/") {
            out.push(ExprToken::Punct("/".into()));
            self.path_elt(out)?;
        }
        Ok(())
    }

    fn path_elt(&mut self, out: &mut Vec<ExprToken>) -> PResult<()> {
        if self.eat_punct("^") {
            out.push(ExprToken::Punct("^".into()));
        }
        if self.eat_punct("!") {
            out.push(ExprToken::Punct("!".into()));
        }
        match self.next() {
            Some(Tok::IriRef(i)) => out.push(ExprToken::Iri(self.resolve_iri(&i))),
            Some(Tok::PName { prefix, local }) => out.push(ExprToken::Iri(self.expand(&prefix, &local)?)),
            Some(Tok::Word(w)) if w == "a" => out.push(ExprToken::Iri(RDF_TYPE.into())),
            Some(Tok::Punct("(")) => {
                out.push(ExprToken::Punct("(".into()));
                self.path_alternative(out)?;
                self.expect_punct(")")?;
                out.push(ExprToken::Punct(")".into()));
            }
            _ => {
                self.idx = self.idx.saturating_sub(1);
                return Err(self.err("predicate"));
            }
        }
        // `?` is a modifier only when no variable name follows it.
        for m in ["*", "+", "?"] {
            if self.at_punct(m) {
                self.idx += 1;
                out.push(ExprToken::Punct(m.into()));
                break;
            }
        }
        Ok(())
    }
}

enum Verb {
    Term(Term),
    Path(Expression),
}

fn is_clause_keyword(w: &str) -> bool {
    KEYWORDS_ENDING_ORDER.iter().any(|k| w.eq_ignore_ascii_case(k))
        || ["ORDER", "HAVING", "GROUP"].iter().any(|k| w.eq_ignore_ascii_case(k))
}

fn numeric_literal(n: &str) -> Literal {
    let kind = if n.contains(['e', 'E']) {
        "double"
    } else if n.contains('.') {
        "decimal"
    } else {
        "integer"
    };
    Literal {
        lexical: n.to_string(),
        datatype: Some(format!("{XSD}{kind}")),
        lang: None,
    }
}

fn classify_projection(expr: Expression, alias: String) -> ProjectionItem {
    let toks = &expr.0;
    if let [ExprToken::Word(name), ExprToken::Punct(open), inner @ .., ExprToken::Punct(close)] = toks.as_slice() {
        if let Some(func) = AggregateFn::from_name(name) {
            if open == "(" && close == ")" && balanced_tokens(inner) {
                let (distinct, rest) = match inner {
                    [ExprToken::Word(d), rest @ ..] if d.eq_ignore_ascii_case("DISTINCT") => (true, rest),
                    rest => (false, rest),
                };
                let arg = match rest {
                    [ExprToken::Punct(star)] if star == "*" => Some(AggregateArg::Star),
                    [] => None,
                    rest => Some(AggregateArg::Expr(Expression(rest.to_vec()))),
                };
                if let Some(arg) = arg {
                    return ProjectionItem::Aggregate {
                        func,
                        distinct,
                        arg,
                        alias,
                    };
                }
            }
        }
    }
    ProjectionItem::Expr { expr, alias }
}

fn balanced_tokens(toks: &[ExprToken]) -> bool {
    let mut depth = 0i32;
    for t in toks {
        if let ExprToken::Punct(p) = t {
            match p.as_str() {
                "(" => depth += 1,
                ")" => {
                    depth -= 1;
                    if depth < 0 {
                        return false;
                    }
                }
                _ => {}
            }
        }
    }
    depth == 0
}

fn validate(q: &ParsedQuery) -> Result<(), SyntaxDiagnosis> {
    if q.bgp().is_empty() {
        return Err(SyntaxDiagnosis::new(
            0,
            "at least one triple pattern",
            "empty graph pattern",
        ));
    }
    let mut bound = Vec::new();
    q.where_clause.collect_bound_vars(&mut bound);
    if let Projection::Items(items) = &q.projection {
        for item in items {
            match item {
                ProjectionItem::Var(v) => {
                    if !bound.contains(&v.as_str()) && !q.group_by.contains(v) {
                        return Err(SyntaxDiagnosis::new(
                            0,
                            "projected variable bound in WHERE",
                            format!("?{v}"),
                        ));
                    }
                }
                other => {
                    let alias = other.alias().unwrap_or_default();
                    let in_bgp = q
                        .bgp()
                        .iter()
                        .any(|t| t.terms().iter().any(|t| t.as_variable() == Some(alias)));
                    if in_bgp {
                        return Err(SyntaxDiagnosis::new(
                            0,
                            "alias distinct from pattern variables",
                            format!("?{alias}"),
                        ));
                    }
                }
            }
        }
    }
    for el in &q.where_clause.elements {
        if let PatternElement::SubSelect(sub) = el {
            validate(sub)?;
        }
    }
    Ok(())
}

/// Parses a query, or explains where and why it is malformed.
pub fn parse_query(text: &str) -> Result<ParsedQuery, SyntaxDiagnosis> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        idx: 0,
        src_len: text.len(),
        prefixes: BTreeMap::new(),
        base: None,
        anon: 0,
        text,
    };
    let mut q = p.query()?;
    q.prefixes = p.prefixes;
    q.base = p.base;
    q.text = p.text.to_string();
    validate(&q)?;
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Term {
        Term::Iri(s.into())
    }

    fn var(s: &str) -> Term {
        Term::Variable(s.into())
    }

    #[test]
    fn minimal_select() {
        let q = parse_query("SELECT ?s WHERE {?s ?p ?o}").unwrap();
        assert_eq!(q.form, QueryForm::Select);
        assert_eq!(q.bgp(), vec![&TriplePattern::new(var("s"), var("p"), var("o"))]);
        assert_eq!(q.projection, Projection::Items(vec![ProjectionItem::Var("s".into())]));
    }

    #[test]
    fn unclosed_group_expects_brace() {
        let d = parse_query("SELECT ?s WHERE {?s ?p ?o").unwrap_err();
        assert_eq!(d.expected, "}");
        assert_eq!(d.found, "end of input");
        assert_eq!(d.position, 25);
    }

    #[test]
    fn prefix_expansion() {
        let q = parse_query("PREFIX dc: <http://purl.org/dc/terms/> SELECT ?t WHERE {?d dc:title ?t}").unwrap();
        assert_eq!(q.bgp()[0].predicate, iri("http://purl.org/dc/terms/title"));
    }

    #[test]
    fn undeclared_prefix_is_an_error() {
        let d = parse_query("SELECT ?t WHERE {?d dc:title ?t}").unwrap_err();
        assert_eq!(d.expected, "declared prefix");
    }

    #[test]
    fn a_is_rdf_type_and_lists_expand() {
        let q = parse_query("PREFIX : <http://x/> SELECT * {?s a :C ; :p ?o, ?o2 . ?o :q \"v\"@EN}").unwrap();
        let bgp = q.bgp();
        assert_eq!(bgp.len(), 4);
        assert_eq!(bgp[0].predicate, iri(RDF_TYPE));
        assert_eq!(bgp[2].object, var("o2"));
        assert_eq!(
            bgp[3].object,
            Term::Literal(Literal {
                lexical: "v".into(),
                datatype: None,
                lang: Some("en".into())
            })
        );
    }

    #[test]
    fn features_are_counted() {
        let q = parse_query(
            "PREFIX : <http://x/> SELECT ?a (COUNT(DISTINCT ?b) AS ?n) WHERE { ?a :p ?b . \
             OPTIONAL { ?b :q ?c } FILTER(?c > 3) ?a :knows+ ?d . \
             { SELECT ?a WHERE { ?a :r ?e } } } GROUP BY ?a ORDER BY DESC(?n) LIMIT 10",
        )
        .unwrap();
        let f = q.features();
        assert_eq!(f.filters, 1);
        assert_eq!(f.optionals, 1);
        assert_eq!(f.property_paths, 1);
        assert_eq!(f.subqueries, 1);
        assert_eq!(f.aggregates, 1);
        assert_eq!(q.bgp().len(), 3);
        assert_eq!(q.group_by, vec!["a".to_string()]);
        assert_eq!(q.limit, Some(10));
        match &q.projection {
            Projection::Items(items) => assert!(matches!(
                &items[1],
                ProjectionItem::Aggregate { func: AggregateFn::Count, distinct: true, alias, .. } if alias == "n"
            )),
            _ => panic!(),
        }
    }

    #[test]
    fn construct_forms() {
        let q = parse_query("PREFIX f: <http://x/> CONSTRUCT {?s f:p ?o} WHERE {?s f:p ?o}").unwrap();
        assert_eq!(q.form, QueryForm::Construct);
        assert_eq!(q.template.len(), 1);
        let q = parse_query("CONSTRUCT WHERE {?s <http://x/p> ?o}").unwrap();
        assert_eq!(q.template.len(), 1);
    }

    #[test]
    fn union_and_exists() {
        let q = parse_query(
            "SELECT ?s { { ?s <http://x/a> ?o } UNION { ?s <http://x/b> ?o } FILTER NOT EXISTS { ?s <http://x/c> ?z } }",
        )
        .unwrap();
        assert_eq!(q.features().unions, 1);
        assert_eq!(q.bgp().len(), 2);
    }

    #[test]
    fn structural_errors() {
        for bad in [
            "SELECT ?s WHERE {}",
            "SELECT WHERE {?s ?p ?o}",
            "SELECT ?x WHERE {?s ?p ?o}",
            "SELECT (COUNT(?s) AS ?s) WHERE {?s ?p ?o}",
            "SELECT ?s WHERE {?s ?p ?o} .",
            "SELCT ?s WHERE {?s ?p ?o}",
            "ASK {?s ?p ?o}",
            "SELECT ?s WHERE {\"lit\" ?p ?o}",
            "garbage &&& text",
        ] {
            assert!(parse_query(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn group_by_variable_may_be_projected() {
        assert!(parse_query("SELECT ?a (COUNT(?p) AS ?n) WHERE {?p <http://x/c> ?a} GROUP BY ?a").is_ok());
    }

    #[test]
    fn blank_nodes() {
        let q = parse_query("SELECT ?o WHERE {_:b <http://x/p> ?o . [] <http://x/q> ?o}").unwrap();
        assert!(matches!(q.bgp()[1].subject, Term::Blank(_)));
    }
}
