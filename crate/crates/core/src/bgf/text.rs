//! Concrete text syntax for grammars. The lexer and expression parser are
//! shared with the transformation-script reader.

use super::{BgfError, Expression, Grammar, Production};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// Double-quoted string.
    Str(String),
    /// Single-quoted string (labels in scripts).
    Quoted(String),
    Number(usize),
    Colon,
    DoubleColon,
    Semi,
    Pipe,
    Star,
    Plus,
    Question,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Quoted(s) => format!("label '{s}'"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Colon => ":",
            Tok::DoubleColon => "::",
            Tok::Semi => ";",
            Tok::Pipe => "|",
            Tok::Star => "*",
            Tok::Plus => "+",
            Tok::Question => "?",
            Tok::Comma => ",",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            _ => "",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) struct Lexer;

impl Lexer {
    pub fn tokenize(text: &str) -> Result<Vec<Spanned>, BgfError> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let (mut i, mut line, mut col) = (0, 1, 1);
        let err = |line, column, message: String| BgfError::Syntax {
            line,
            column,
            message,
        };
        while i < chars.len() {
            let c = chars[i];
            let (start_line, start_col) = (line, col);
            let advance = |n: usize, i: &mut usize, col: &mut usize| {
                *i += n;
                *col += n;
            };
            if c == '\n' {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            if c.is_whitespace() {
                advance(1, &mut i, &mut col);
                continue;
            }
            if c == '#' {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            let tok = if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '-')
                {
                    advance(1, &mut i, &mut col);
                }
                Tok::Ident(chars[start..i].iter().collect())
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(1, &mut i, &mut col);
                }
                let digits: String = chars[start..i].iter().collect();
                Tok::Number(digits.parse().map_err(|_| {
                    err(start_line, start_col, format!("number too large: {digits}"))
                })?)
            } else if c == '"' || c == '\'' {
                advance(1, &mut i, &mut col);
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None | Some('\n') => {
                            return Err(err(start_line, start_col, "unterminated string".into()))
                        }
                        Some(&q) if q == c => {
                            advance(1, &mut i, &mut col);
                            break;
                        }
                        Some('\\') => {
                            let escaped = match chars.get(i + 1) {
                                Some('n') => '\n',
                                Some('t') => '\t',
                                Some('\\') => '\\',
                                Some('"') => '"',
                                Some('\'') => '\'',
                                _ => {
                                    return Err(err(line, col, "invalid escape sequence".into()))
                                }
                            };
                            s.push(escaped);
                            advance(2, &mut i, &mut col);
                        }
                        Some(&ch) => {
                            s.push(ch);
                            advance(1, &mut i, &mut col);
                        }
                    }
                }
                if c == '"' {
                    Tok::Str(s)
                } else {
                    Tok::Quoted(s)
                }
            } else {
                let (tok, len) = match c {
                    ':' if chars.get(i + 1) == Some(&':') => (Tok::DoubleColon, 2),
                    ':' => (Tok::Colon, 1),
                    ';' => (Tok::Semi, 1),
                    '|' => (Tok::Pipe, 1),
                    '*' => (Tok::Star, 1),
                    '+' => (Tok::Plus, 1),
                    '?' => (Tok::Question, 1),
                    ',' => (Tok::Comma, 1),
                    '(' => (Tok::LParen, 1),
                    ')' => (Tok::RParen, 1),
                    '{' => (Tok::LBrace, 1),
                    '}' => (Tok::RBrace, 1),
                    '[' => (Tok::LBracket, 1),
                    ']' => (Tok::RBracket, 1),
                    other => {
                        return Err(err(line, col, format!("unexpected character `{other}`")))
                    }
                };
                advance(len, &mut i, &mut col);
                tok
            };
            out.push(Spanned {
                tok,
                line: start_line,
                column: start_col,
            });
        }
        out.push(Spanned {
            tok: Tok::Eof,
            line,
            column: col,
        });
        Ok(out)
    }
}

pub(crate) struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    pub fn new(text: &str) -> Result<Parser, BgfError> {
        Ok(Parser {
            toks: Lexer::tokenize(text)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn next(&mut self) -> Tok {
        let tok = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn error(&self, message: impl Into<String>) -> BgfError {
        let here = &self.toks[self.pos];
        BgfError::Syntax {
            line: here.line,
            column: here.column,
            message: message.into(),
        }
    }

    pub fn unexpected(&self, wanted: &str) -> BgfError {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: Tok) -> Result<(), BgfError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", tok.symbol())))
        }
    }

    pub fn ident(&mut self) -> Result<String, BgfError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    /// An identifier usable as a nonterminal name.
    pub fn nonterminal(&mut self) -> Result<String, BgfError> {
        if let Tok::Ident(s) = self.peek() {
            if super::KEYWORDS.contains(&s.as_str()) {
                return Err(self.error(format!("keyword `{s}` cannot name a nonterminal")));
            }
        }
        self.ident()
    }

    pub fn number(&mut self) -> Result<usize, BgfError> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.next();
                Ok(n)
            }
            _ => Err(self.unexpected("number")),
        }
    }

    fn starts_item(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::Str(_) | Tok::LParen | Tok::LBrace
        )
    }

    /// choice := seq ('|' seq)*
    pub fn expression(&mut self) -> Result<Expression, BgfError> {
        let mut alts = vec![self.sequence()?];
        while self.eat(&Tok::Pipe) {
            alts.push(self.sequence()?);
        }
        Ok(Expression::choice(alts))
    }

    fn sequence(&mut self) -> Result<Expression, BgfError> {
        let mut parts = Vec::new();
        while self.starts_item() {
            parts.push(self.selectable()?);
        }
        if parts.is_empty() {
            return Err(self.unexpected("expression (empty alternative; write `eps`)"));
        }
        Ok(Expression::seq(parts))
    }

    fn selectable(&mut self) -> Result<Expression, BgfError> {
        if let (Tok::Ident(name), Tok::DoubleColon) = (self.peek().clone(), self.peek_at(1)) {
            self.next();
            self.next();
            let inner = self.selectable()?;
            return Ok(Expression::sel(name, inner));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expression, BgfError> {
        let mut e = self.atom()?;
        loop {
            e = match self.peek() {
                Tok::Star => Expression::star(e),
                Tok::Plus => Expression::plus(e),
                Tok::Question => Expression::opt(e),
                _ => return Ok(e),
            };
            self.next();
        }
    }

    fn atom(&mut self) -> Result<Expression, BgfError> {
        match self.peek().clone() {
            Tok::Str(s) => {
                if s.is_empty() {
                    return Err(self.error("empty terminal"));
                }
                self.next();
                Ok(Expression::Terminal(s))
            }
            Tok::Ident(s) if s == "eps" => {
                self.next();
                Ok(Expression::Epsilon)
            }
            Tok::Ident(s) if s == "phi" => {
                self.next();
                Ok(Expression::Empty)
            }
            Tok::Ident(s) => {
                self.next();
                Ok(Expression::Nonterminal(s))
            }
            Tok::LParen => {
                self.next();
                let e = self.expression()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrace => {
                self.next();
                let item = self.selectable()?;
                let sep = self.selectable()?;
                self.expect(Tok::RBrace)?;
                self.expect(Tok::Plus)?;
                Ok(Expression::sep_plus(item, sep))
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    /// `[label] lhs : rhs ;`
    fn production(&mut self) -> Result<Production, BgfError> {
        let label = if self.eat(&Tok::LBracket) {
            let l = self.ident()?;
            self.expect(Tok::RBracket)?;
            l
        } else {
            String::new()
        };
        let lhs = self.nonterminal()?;
        self.expect(Tok::Colon)?;
        let rhs = self.expression()?;
        self.expect(Tok::Semi)?;
        Ok(Production::new(label, lhs, rhs))
    }
}

pub fn parse_bgf(text: &str) -> Result<Grammar, BgfError> {
    let mut p = Parser::new(text)?;
    let mut g = Grammar::default();
    if matches!(p.peek(), Tok::Ident(s) if s == "roots") && *p.peek_at(1) == Tok::Colon {
        p.next();
        p.next();
        while !p.eat(&Tok::Semi) {
            g.roots.push(p.nonterminal()?);
        }
    }
    while !p.at_eof() {
        g.productions.push(p.production()?);
    }
    g.validate()?;
    Ok(g)
}

pub fn parse_expression(text: &str) -> Result<Expression, BgfError> {
    let mut p = Parser::new(text)?;
    let e = p.expression()?;
    if !p.at_eof() {
        return Err(p.unexpected("end of input"));
    }
    Ok(e)
}

pub fn serialize_bgf(g: &Grammar) -> String {
    let mut out = String::from("roots:");
    for r in &g.roots {
        out.push(' ');
        out.push_str(r);
    }
    out.push_str(" ;\n");
    for p in &g.productions {
        if p.is_labeled() {
            out.push_str(&format!("[{}] ", p.label));
        }
        out.push_str(&format!("{} : {} ;\n", p.lhs, serialize_expression(&p.rhs)));
    }
    out
}

pub fn serialize_expression(e: &Expression) -> String {
    let mut out = String::new();
    write_expr(e, 0, &mut out);
    out
}

fn level(e: &Expression) -> u8 {
    match e {
        Expression::Choice(_) => 0,
        Expression::Sequence(_) => 1,
        Expression::Selector(..) => 2,
        Expression::Star(_) | Expression::Plus(_) | Expression::Optional(_) => 3,
        _ => 4,
    }
}

fn write_expr(e: &Expression, ctx: u8, out: &mut String) {
    if level(e) < ctx {
        out.push('(');
        write_expr(e, 0, out);
        out.push(')');
        return;
    }
    match e {
        Expression::Epsilon => out.push_str("eps"),
        Expression::Empty => out.push_str("phi"),
        Expression::Terminal(t) => quote(t, out),
        Expression::Nonterminal(n) => out.push_str(n),
        Expression::Sequence(xs) | Expression::Choice(xs) => {
            let (sep, inner) = if matches!(e, Expression::Choice(_)) {
                (" | ", 1)
            } else {
                (" ", 2)
            };
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                write_expr(x, inner, out);
            }
        }
        Expression::Star(x) | Expression::Plus(x) | Expression::Optional(x) => {
            write_expr(x, 3, out);
            out.push(match e {
                Expression::Star(_) => '*',
                Expression::Plus(_) => '+',
                _ => '?',
            });
        }
        Expression::Selector(n, x) => {
            out.push_str(n);
            out.push_str("::");
            write_expr(x, 2, out);
        }
        Expression::SeparatedPlus(item, sep) => {
            out.push('{');
            write_expr(item, 2, out);
            out.push(' ');
            write_expr(sep, 2, out);
            out.push_str("}+");
        }
    }
}

fn quote(t: &str, out: &mut String) {
    out.push('"');
    for c in t.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
}
