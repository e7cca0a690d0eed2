//! Functional notation used in reports and diagnostics:
//! `p('', function, seq([str, +(str), expression]))`.

use super::{Expression, Production};

pub fn render_production(p: &Production) -> String {
    format!(
        "p('{}', {}, {})",
        p.label,
        p.lhs,
        render_expression(&p.rhs)
    )
}

pub fn render_expression(e: &Expression) -> String {
    let list = |xs: &[Expression]| {
        xs.iter()
            .map(render_expression)
            .collect::<Vec<_>>()
            .join(", ")
    };
    match e {
        Expression::Epsilon => "eps".to_string(),
        Expression::Empty => "empty".to_string(),
        Expression::Terminal(t) => format!("'{t}'"),
        Expression::Nonterminal(n) => n.clone(),
        Expression::Sequence(xs) => format!("seq([{}])", list(xs)),
        Expression::Choice(xs) => format!("choice([{}])", list(xs)),
        Expression::Star(x) => format!("*({})", render_expression(x)),
        Expression::Plus(x) => format!("+({})", render_expression(x)),
        Expression::Optional(x) => format!("?({})", render_expression(x)),
        Expression::Selector(n, x) => format!("sel('{n}', {})", render_expression(x)),
        Expression::SeparatedPlus(item, sep) => format!(
            "s+({}, {})",
            render_expression(item),
            render_expression(sep)
        ),
    }
}
