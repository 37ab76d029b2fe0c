//! Tokenizer for the supported SPARQL subset.

use super::SyntaxDiagnosis;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    IriRef(String),
    PName { prefix: String, local: String },
    Var(String),
    Blank(String),
    Str(String),
    LangTag(String),
    Number(String),
    Word(String),
    Punct(&'static str),
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::IriRef(i) => format!("<{i}>"),
            Tok::PName { prefix, local } => format!("{prefix}:{local}"),
            Tok::Var(v) => format!("?{v}"),
            Tok::Blank(b) => format!("_:{b}"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::LangTag(l) => format!("@{l}"),
            Tok::Number(n) => n.clone(),
            Tok::Word(w) => w.clone(),
            Tok::Punct(p) => (*p).to_string(),
        }
    }

    pub(crate) fn is_word(&self, kw: &str) -> bool {
        matches!(self, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    pub(crate) fn is_punct(&self, p: &str) -> bool {
        matches!(self, Tok::Punct(q) if *q == p)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub pos: usize,
}

const PUNCT: &[&str] = &[
    "^^", "&&", "||", "!=", "<=", ">=", "{", "}", "(", ")", "[", "]", ".", ",", ";", "*", "/", "|", "!", "=", "<", ">",
    "+", "-", "^", "?",
];

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '\u{00B7}'
}

fn is_var_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\u{00B7}'
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn error(&self, expected: &str) -> SyntaxDiagnosis {
        let found = self
            .peek()
            .map(|c| format!("'{c}'"))
            .unwrap_or_else(|| "end of input".into());
        SyntaxDiagnosis::new(self.pos, expected, found)
    }

    fn skip_trivia(&mut self) {
        loop {
            let before = self.pos;
            while self.peek().is_some_and(char::is_whitespace) {
                self.bump();
            }
            if self.peek() == Some('#') {
                while self.peek().is_some_and(|c| c != '\n') {
                    self.bump();
                }
            }
            if self.pos == before {
                return;
            }
        }
    }

    /// `<...>` is an IRI only if it closes before any whitespace or
    /// forbidden character; otherwise `<` is an operator.
    fn try_iri(&mut self) -> Option<String> {
        let body = &self.rest()[1..];
        for (i, c) in body.char_indices() {
            match c {
                '>' => {
                    let iri = body[..i].to_string();
                    self.pos += i + 2;
                    return Some(iri);
                }
                c if c.is_whitespace() || "<\"{}|^`\\".contains(c) => return None,
                _ => {}
            }
        }
        None
    }

    fn string(&mut self, quote: char) -> Result<String, SyntaxDiagnosis> {
        let long = self.rest().starts_with(&format!("{quote}{quote}{quote}"));
        let start = self.pos;
        self.pos += if long { 3 } else { 1 };
        let mut out = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(SyntaxDiagnosis::new(start, "closing quote", "end of input"));
            };
            match c {
                '\\' => {
                    let esc = self.bump().ok_or_else(|| self.error("escape sequence"))?;
                    match esc {
                        't' => out.push('\t'),
                        'n' => out.push('\n'),
                        'r' => out.push('\r'),
                        'b' => out.push('\u{8}'),
                        'f' => out.push('\u{c}'),
                        'u' | 'U' => {
                            let len = if esc == 'u' { 4 } else { 8 };
                            let hex: String = (0..len).filter_map(|_| self.bump()).collect();
                            let ch = u32::from_str_radix(&hex, 16)
                                .ok()
                                .and_then(char::from_u32)
                                .ok_or_else(|| self.error("unicode escape"))?;
                            out.push(ch);
                        }
                        other => out.push(other),
                    }
                }
                c if c == quote => {
                    if !long {
                        return Ok(out);
                    }
                    if self.rest().starts_with(&format!("{quote}{quote}")) {
                        self.pos += 2;
                        return Ok(out);
                    }
                    out.push(c);
                }
                '\n' | '\r' if !long => {
                    return Err(SyntaxDiagnosis::new(start, "closing quote", "line break"));
                }
                c => out.push(c),
            }
        }
    }

    fn number(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.bump();
            if matches!(self.peek(), Some('+' | '-')) {
                self.bump();
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                }
            } else {
                self.pos = save;
            }
        }
        self.src[start..self.pos].to_string()
    }

    /// Local part of a prefixed name; a trailing `.` is left for the parser.
    fn pname_local(&mut self) -> String {
        let start = self.pos;
        loop {
            match self.peek() {
                Some(c) if is_name_char(c) || c == ':' || c == '.' => {
                    self.bump();
                }
                Some('%') => {
                    self.bump();
                }
                Some('\\') => {
                    self.bump();
                    self.bump();
                }
                _ => break,
            }
        }
        while self.src[start..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        self.src[start..self.pos].replace('\\', "")
    }

    fn next_token(&mut self) -> Result<Option<Spanned>, SyntaxDiagnosis> {
        self.skip_trivia();
        let pos = self.pos;
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let tok = match c {
            '<' => match self.try_iri() {
                Some(iri) => Tok::IriRef(iri),
                None => self.punct()?,
            },
            '?' | '$' if self.peek_at(1).is_some_and(is_var_char) => {
                self.bump();
                let start = self.pos;
                while self.peek().is_some_and(is_var_char) {
                    self.bump();
                }
                Tok::Var(self.src[start..self.pos].to_string())
            }
            '"' | '\'' => Tok::Str(self.string(c)?),
            '@' => {
                self.bump();
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '-') {
                    self.bump();
                }
                if self.pos == start {
                    return Err(self.error("language tag"));
                }
                Tok::LangTag(self.src[start..self.pos].to_string())
            }
            '_' if self.peek_at(1) == Some(':') => {
                self.pos += 2;
                let start = self.pos;
                while self.peek().is_some_and(|c| is_name_char(c) || c == '.') {
                    self.bump();
                }
                while self.src[start..self.pos].ends_with('.') {
                    self.pos -= 1;
                }
                if self.pos == start {
                    return Err(self.error("blank node label"));
                }
                Tok::Blank(self.src[start..self.pos].to_string())
            }
            ':' => {
                self.bump();
                Tok::PName {
                    prefix: String::new(),
                    local: self.pname_local(),
                }
            }
            c if c.is_ascii_digit() => Tok::Number(self.number()),
            '.' if self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => Tok::Number(self.number()),
            c if is_name_start(c) => {
                let start = self.pos;
                while self.peek().is_some_and(|c| is_name_char(c) || c == '.') {
                    self.bump();
                }
                while self.src[start..self.pos].ends_with('.') {
                    self.pos -= 1;
                }
                let word = self.src[start..self.pos].to_string();
                if self.peek() == Some(':') {
                    self.bump();
                    Tok::PName {
                        prefix: word,
                        local: self.pname_local(),
                    }
                } else if word.contains(['-', '.']) {
                    return Err(SyntaxDiagnosis::new(start, "keyword or prefixed name", word));
                } else {
                    Tok::Word(word)
                }
            }
            _ => self.punct()?,
        };
        Ok(Some(Spanned { tok, pos }))
    }

    fn punct(&mut self) -> Result<Tok, SyntaxDiagnosis> {
        let rest = self.rest();
        match PUNCT.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                self.pos += p.len();
                Ok(Tok::Punct(p))
            }
            None => Err(self.error("token")),
        }
    }
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Spanned>, SyntaxDiagnosis> {
    let mut lx = Lexer { src, pos: 0 };
    let mut out = Vec::new();
    while let Some(t) = lx.next_token()? {
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_query() {
        assert_eq!(
            toks("SELECT ?s WHERE {?s dc:title \"x\"@en .}"),
            vec![
                Tok::Word("SELECT".into()),
                Tok::Var("s".into()),
                Tok::Word("WHERE".into()),
                Tok::Punct("{"),
                Tok::Var("s".into()),
                Tok::PName {
                    prefix: "dc".into(),
                    local: "title".into()
                },
                Tok::Str("x".into()),
                Tok::LangTag("en".into()),
                Tok::Punct("."),
                Tok::Punct("}"),
            ]
        );
    }

    #[test]
    fn less_than_versus_iri() {
        assert_eq!(
            toks("?a < 5 <http://x/a>"),
            vec![
                Tok::Var("a".into()),
                Tok::Punct("<"),
                Tok::Number("5".into()),
                Tok::IriRef("http://x/a".into())
            ]
        );
        assert_eq!(toks("?a<=?b")[1], Tok::Punct("<="));
    }

    #[test]
    fn pname_trailing_dot_and_number() {
        assert_eq!(
            toks("ex:a. 3.5 4."),
            vec![
                Tok::PName {
                    prefix: "ex".into(),
                    local: "a".into()
                },
                Tok::Punct("."),
                Tok::Number("3.5".into()),
                Tok::Number("4".into()),
                Tok::Punct("."),
            ]
        );
    }

    #[test]
    fn comments_and_long_strings() {
        assert_eq!(
            toks("# c\n'''a'b''' \"e\\\"q\""),
            vec![Tok::Str("a'b".into()), Tok::Str("e\"q".into())]
        );
    }

    #[test]
    fn unterminated_string() {
        assert!(tokenize("\"abc").is_err());
    }
}
