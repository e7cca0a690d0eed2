//! JSON export: `{roots, productions: [{label, lhs, rhs}]}` with `rhs` as a
//! tree tagged by `kind`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{BgfError, Expression, Grammar, Production};

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ExprJson {
    Epsilon,
    Empty,
    Terminal { text: String },
    Nonterminal { name: String },
    Sequence { parts: Vec<ExprJson> },
    Choice { alts: Vec<ExprJson> },
    Star { inner: Box<ExprJson> },
    Plus { inner: Box<ExprJson> },
    Optional { inner: Box<ExprJson> },
    Selector { name: String, inner: Box<ExprJson> },
    SeparatedPlus { item: Box<ExprJson>, separator: Box<ExprJson> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductionJson {
    label: String,
    lhs: String,
    rhs: ExprJson,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GrammarJson {
    roots: Vec<String>,
    productions: Vec<ProductionJson>,
}

impl From<&Expression> for ExprJson {
    fn from(e: &Expression) -> Self {
        let b = |x: &Expression| Box::new(ExprJson::from(x));
        match e {
            Expression::Epsilon => ExprJson::Epsilon,
            Expression::Empty => ExprJson::Empty,
            Expression::Terminal(text) => ExprJson::Terminal { text: text.clone() },
            Expression::Nonterminal(name) => ExprJson::Nonterminal { name: name.clone() },
            Expression::Sequence(xs) => ExprJson::Sequence {
                parts: xs.iter().map(ExprJson::from).collect(),
            },
            Expression::Choice(xs) => ExprJson::Choice {
                alts: xs.iter().map(ExprJson::from).collect(),
            },
            Expression::Star(x) => ExprJson::Star { inner: b(x) },
            Expression::Plus(x) => ExprJson::Plus { inner: b(x) },
            Expression::Optional(x) => ExprJson::Optional { inner: b(x) },
            Expression::Selector(name, x) => ExprJson::Selector {
                name: name.clone(),
                inner: b(x),
            },
            Expression::SeparatedPlus(item, sep) => ExprJson::SeparatedPlus {
                item: b(item),
                separator: b(sep),
            },
        }
    }
}

impl From<ExprJson> for Expression {
    fn from(e: ExprJson) -> Self {
        let u = |x: Box<ExprJson>| Box::new(Expression::from(*x));
        match e {
            ExprJson::Epsilon => Expression::Epsilon,
            ExprJson::Empty => Expression::Empty,
            ExprJson::Terminal { text } => Expression::Terminal(text),
            ExprJson::Nonterminal { name } => Expression::Nonterminal(name),
            ExprJson::Sequence { parts } => {
                Expression::Sequence(parts.into_iter().map(Expression::from).collect())
            }
            ExprJson::Choice { alts } => {
                Expression::Choice(alts.into_iter().map(Expression::from).collect())
            }
            ExprJson::Star { inner } => Expression::Star(u(inner)),
            ExprJson::Plus { inner } => Expression::Plus(u(inner)),
            ExprJson::Optional { inner } => Expression::Optional(u(inner)),
            ExprJson::Selector { name, inner } => Expression::Selector(name, u(inner)),
            ExprJson::SeparatedPlus { item, separator } => {
                Expression::SeparatedPlus(u(item), u(separator))
            }
        }
    }
}

pub(super) fn expression_to_json(e: &Expression) -> Value {
    serde_json::to_value(ExprJson::from(e)).expect("expression serializes")
}

pub(super) fn grammar_to_json(g: &Grammar) -> Value {
    let doc = GrammarJson {
        roots: g.roots.clone(),
        productions: g
            .productions
            .iter()
            .map(|p| ProductionJson {
                label: p.label.clone(),
                lhs: p.lhs.clone(),
                rhs: ExprJson::from(&p.rhs),
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("grammar serializes")
}

/// Parses and validates; unary sequences/choices are rejected.
pub(super) fn grammar_from_json(v: &Value) -> Result<Grammar, BgfError> {
    let doc: GrammarJson =
        serde_json::from_value(v.clone()).map_err(|e| BgfError::Json(e.to_string()))?;
    let g = Grammar {
        roots: doc.roots,
        productions: doc
            .productions
            .into_iter()
            .map(|p| Production::new(p.label, p.lhs, p.rhs.into()))
            .collect(),
    };
    g.validate()?;
    Ok(g)
}

impl Expression {
    pub fn to_json(&self) -> Value {
        expression_to_json(self)
    }
}
