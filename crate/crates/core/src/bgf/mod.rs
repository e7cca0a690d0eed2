//! The BGF grammar model: expressions, productions, grammars, canonical
//! equality and usage analysis.

mod json;
mod notation;
mod text;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use notation::{render_expression, render_production};
pub use text::{parse_bgf, parse_expression, serialize_bgf, serialize_expression};

pub(crate) use text::{Parser, Tok};

/// Keywords of the BGF text format; they cannot be used as nonterminal names.
pub const KEYWORDS: [&str; 2] = ["eps", "phi"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BgfError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate labeled production [{label}] {lhs}")]
    DuplicateLabel { lhs: String, label: String },
    #[error("{0} with fewer than two children")]
    Unary(&'static str),
    #[error("invalid nonterminal name `{0}`")]
    InvalidName(String),
    #[error("empty {0}")]
    EmptyText(&'static str),
    #[error("json: {0}")]
    Json(String),
}

/// Right-hand side expression of a production.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expression {
    /// The empty word.
    Epsilon,
    /// Failure; matches nothing.
    Empty,
    Terminal(String),
    Nonterminal(String),
    Sequence(Vec<Expression>),
    Choice(Vec<Expression>),
    Star(Box<Expression>),
    Plus(Box<Expression>),
    Optional(Box<Expression>),
    Selector(String, Box<Expression>),
    /// One or more `item`s separated by `separator`.
    SeparatedPlus(Box<Expression>, Box<Expression>),
}

impl Expression {
    pub fn nt(name: impl Into<String>) -> Self {
        Expression::Nonterminal(name.into())
    }

    pub fn term(text: impl Into<String>) -> Self {
        Expression::Terminal(text.into())
    }

    pub fn star(inner: Expression) -> Self {
        Expression::Star(Box::new(inner))
    }

    pub fn plus(inner: Expression) -> Self {
        Expression::Plus(Box::new(inner))
    }

    pub fn opt(inner: Expression) -> Self {
        Expression::Optional(Box::new(inner))
    }

    pub fn sel(name: impl Into<String>, inner: Expression) -> Self {
        Expression::Selector(name.into(), Box::new(inner))
    }

    pub fn sep_plus(item: Expression, separator: Expression) -> Self {
        Expression::SeparatedPlus(Box::new(item), Box::new(separator))
    }

    /// Sequence constructor that keeps the two-children invariant:
    /// no parts gives ε, one part gives the part itself.
    pub fn seq(mut parts: Vec<Expression>) -> Self {
        match parts.len() {
            0 => Expression::Epsilon,
            1 => parts.pop().unwrap(),
            _ => Expression::Sequence(parts),
        }
    }

    /// Choice constructor; see [`Expression::seq`]. No alternatives gives φ.
    pub fn choice(mut alts: Vec<Expression>) -> Self {
        match alts.len() {
            0 => Expression::Empty,
            1 => alts.pop().unwrap(),
            _ => Expression::Choice(alts),
        }
    }

    pub fn as_nonterminal(&self) -> Option<&str> {
        match self {
            Expression::Nonterminal(n) => Some(n),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&Expression> {
        match self {
            Expression::Epsilon
            | Expression::Empty
            | Expression::Terminal(_)
            | Expression::Nonterminal(_) => Vec::new(),
            Expression::Sequence(xs) | Expression::Choice(xs) => xs.iter().collect(),
            Expression::Star(x)
            | Expression::Plus(x)
            | Expression::Optional(x)
            | Expression::Selector(_, x) => vec![x],
            Expression::SeparatedPlus(a, b) => vec![a, b],
        }
    }

    /// Pre-order traversal of all subexpressions, including `self`.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expression)) {
        f(self);
        for child in self.children() {
            child.walk(f);
        }
    }

    /// Bottom-up rewrite of every node.
    pub fn transform(&self, f: &mut impl FnMut(Expression) -> Expression) -> Expression {
        let rebuilt = match self {
            Expression::Epsilon
            | Expression::Empty
            | Expression::Terminal(_)
            | Expression::Nonterminal(_) => self.clone(),
            Expression::Sequence(xs) => {
                Expression::Sequence(xs.iter().map(|x| x.transform(f)).collect())
            }
            Expression::Choice(xs) => {
                Expression::Choice(xs.iter().map(|x| x.transform(f)).collect())
            }
            Expression::Star(x) => Expression::star(x.transform(f)),
            Expression::Plus(x) => Expression::plus(x.transform(f)),
            Expression::Optional(x) => Expression::opt(x.transform(f)),
            Expression::Selector(n, x) => Expression::sel(n.clone(), x.transform(f)),
            Expression::SeparatedPlus(a, b) => Expression::sep_plus(a.transform(f), b.transform(f)),
        };
        f(rebuilt)
    }

    /// Top-down replacement: nodes equal to `target` are replaced by `with`
    /// and not descended into. Returns the number of replacements.
    pub fn replace_all(&mut self, target: &Expression, with: &Expression) -> usize {
        if self == target {
            *self = with.clone();
            return 1;
        }
        let mut count = 0;
        for child in self.children_mut() {
            count += child.replace_all(target, with);
        }
        count
    }

    pub(crate) fn children_mut(&mut self) -> Vec<&mut Expression> {
        match self {
            Expression::Epsilon
            | Expression::Empty
            | Expression::Terminal(_)
            | Expression::Nonterminal(_) => Vec::new(),
            Expression::Sequence(xs) | Expression::Choice(xs) => xs.iter_mut().collect(),
            Expression::Star(x)
            | Expression::Plus(x)
            | Expression::Optional(x)
            | Expression::Selector(_, x) => vec![x.as_mut()],
            Expression::SeparatedPlus(a, b) => vec![a.as_mut(), b.as_mut()],
        }
    }

    /// The node reached by following child indices from `self`.
    pub fn at_path(&self, path: &[usize]) -> Option<&Expression> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.children().get(*i)?.at_path(rest),
        }
    }

    pub fn at_path_mut(&mut self, path: &[usize]) -> Option<&mut Expression> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.children_mut().into_iter().nth(*i)?.at_path_mut(rest),
        }
    }

    pub fn nonterminals(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expression::Nonterminal(n) = e {
                out.push(n.as_str());
            }
        });
        out
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.count_nonterminal(name) > 0
    }

    pub fn count_nonterminal(&self, name: &str) -> usize {
        self.nonterminals().into_iter().filter(|n| *n == name).count()
    }

    pub fn rename(&self, from: &str, to: &str) -> Expression {
        self.transform(&mut |e| match e {
            Expression::Nonterminal(n) if n == from => Expression::nt(to),
            other => other,
        })
    }

    pub fn contains(&self, pred: impl Fn(&Expression) -> bool) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= pred(e));
        found
    }

    fn validate(&self) -> Result<(), BgfError> {
        match self {
            Expression::Terminal(t) if t.is_empty() => Err(BgfError::EmptyText("terminal")),
            Expression::Nonterminal(n) if !is_identifier(n) => {
                Err(BgfError::InvalidName(n.clone()))
            }
            Expression::Selector(n, _) if !is_name(n) => Err(BgfError::InvalidName(n.clone())),
            Expression::Sequence(xs) if xs.len() < 2 => Err(BgfError::Unary("sequence")),
            Expression::Choice(xs) if xs.len() < 2 => Err(BgfError::Unary("choice")),
            _ => self.children().into_iter().try_for_each(Expression::validate),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_expression(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Production {
    /// Possibly empty.
    pub label: String,
    pub lhs: String,
    pub rhs: Expression,
}

impl Production {
    pub fn new(label: impl Into<String>, lhs: impl Into<String>, rhs: Expression) -> Self {
        Production {
            label: label.into(),
            lhs: lhs.into(),
            rhs,
        }
    }

    pub fn unlabeled(lhs: impl Into<String>, rhs: Expression) -> Self {
        Production::new("", lhs, rhs)
    }

    pub fn is_labeled(&self) -> bool {
        !self.label.is_empty()
    }

    /// `X → Y` for a single nonterminal `Y`.
    pub fn chain_target(&self) -> Option<&str> {
        self.rhs.as_nonterminal()
    }

    pub fn rename(&self, from: &str, to: &str) -> Production {
        Production {
            label: self.label.clone(),
            lhs: if self.lhs == from { to.to_string() } else { self.lhs.clone() },
            rhs: self.rhs.rename(from, to),
        }
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_production(self))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Grammar {
    pub roots: Vec<String>,
    pub productions: Vec<Production>,
}

/// Result of [`Grammar::usage`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Usage {
    pub defined: BTreeSet<String>,
    pub used: BTreeSet<String>,
    /// Defined but never used.
    pub top: BTreeSet<String>,
}

impl Grammar {
    pub fn new(roots: Vec<String>, productions: Vec<Production>) -> Self {
        Grammar { roots, productions }
    }

    pub fn usage(&self) -> Usage {
        let defined: BTreeSet<String> = self.productions.iter().map(|p| p.lhs.clone()).collect();
        let used: BTreeSet<String> = self
            .productions
            .iter()
            .flat_map(|p| p.rhs.nonterminals())
            .map(str::to_string)
            .collect();
        let top = defined.difference(&used).cloned().collect();
        Usage { defined, used, top }
    }

    pub fn is_defined(&self, nt: &str) -> bool {
        self.productions.iter().any(|p| p.lhs == nt)
    }

    pub fn is_used(&self, nt: &str) -> bool {
        self.productions.iter().any(|p| p.rhs.mentions(nt))
    }

    /// Defined, used or listed as a root.
    pub fn mentions(&self, nt: &str) -> bool {
        self.roots.iter().any(|r| r == nt) || self.is_defined(nt) || self.is_used(nt)
    }

    pub fn definitions<'a>(&'a self, nt: &'a str) -> impl Iterator<Item = &'a Production> + 'a {
        self.productions.iter().filter(move |p| p.lhs == nt)
    }

    pub fn definition_indices(&self, nt: &str) -> Vec<usize> {
        self.productions
            .iter()
            .enumerate()
            .filter(|(_, p)| p.lhs == nt)
            .map(|(i, _)| i)
            .collect()
    }

    /// Total number of nonterminal occurrences of `nt` across all right-hand sides.
    pub fn occurrences(&self, nt: &str) -> usize {
        self.productions.iter().map(|p| p.rhs.count_nonterminal(nt)).sum()
    }

    /// All nonterminal names in order of first appearance (roots, then lhs/rhs
    /// in production order).
    pub fn nonterminals(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut push = |n: &str| {
            if seen.insert(n.to_string()) {
                out.push(n.to_string());
            }
        };
        for r in &self.roots {
            push(r);
        }
        for p in &self.productions {
            push(&p.lhs);
            for n in p.rhs.nonterminals() {
                push(n);
            }
        }
        out
    }

    pub fn is_root(&self, nt: &str) -> bool {
        self.roots.iter().any(|r| r == nt)
    }

    pub fn find(&self, target: &Production) -> Option<usize> {
        self.productions.iter().position(|p| p == target)
    }

    /// Checks every structural invariant of the model.
    pub fn validate(&self) -> Result<(), BgfError> {
        for r in &self.roots {
            if !is_identifier(r) {
                return Err(BgfError::InvalidName(r.clone()));
            }
        }
        let mut labels = BTreeSet::new();
        for p in &self.productions {
            if !is_identifier(&p.lhs) {
                return Err(BgfError::InvalidName(p.lhs.clone()));
            }
            if p.is_labeled() && !is_name(&p.label) {
                return Err(BgfError::InvalidName(p.label.clone()));
            }
            p.rhs.validate()?;
            if p.is_labeled() && !labels.insert((p.lhs.clone(), p.label.clone())) {
                return Err(BgfError::DuplicateLabel {
                    lhs: p.lhs.clone(),
                    label: p.label.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        json::grammar_to_json(self)
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Grammar, BgfError> {
        json::grammar_from_json(value)
    }

    pub fn from_json_str(text: &str) -> Result<Grammar, BgfError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| BgfError::Json(e.to_string()))?;
        Grammar::from_json(&value)
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_bgf(self))
    }
}

/// Root lists equal as sets and productions equal as multisets.
pub fn canonical_eq(a: &Grammar, b: &Grammar) -> bool {
    let roots_a: BTreeSet<&String> = a.roots.iter().collect();
    let roots_b: BTreeSet<&String> = b.roots.iter().collect();
    if roots_a != roots_b || a.productions.len() != b.productions.len() {
        return false;
    }
    let mut pa: Vec<&Production> = a.productions.iter().collect();
    let mut pb: Vec<&Production> = b.productions.iter().collect();
    pa.sort();
    pb.sort();
    pa == pb
}

/// `[A-Za-z_][A-Za-z0-9_-]*`, excluding the keywords.
pub fn is_identifier(s: &str) -> bool {
    is_name(s) && !KEYWORDS.contains(&s)
}

/// Lexical shape of labels and selector names (keywords allowed).
pub fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}
