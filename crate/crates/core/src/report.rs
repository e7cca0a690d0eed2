//! Markdown report of one convergence run.

use std::fmt::Write;

use crate::bgf::{render_production, serialize_bgf, serialize_expression, Grammar};
use crate::converge::{verify, ConvergenceResult};
use crate::xbgf::{render_step, Step};

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    /// List identity pairs of the mapping as (skipped) renames too.
    pub show_noop_renames: bool,
}

fn steps(out: &mut String, script: &[Step]) {
    for (k, s) in script.iter().enumerate() {
        let _ = writeln!(out, "{}. `{}`", k + 1, render_step(s));
    }
    out.push('\n');
}

fn cell(text: &str) -> String {
    text.replace('|', "\\|")
}

pub fn generate_report(
    name: &str,
    result: &ConvergenceResult,
    master: &Grammar,
    options: &ReportOptions,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Convergence of {name}\n");

    out.push_str("## Source grammar\n\n```\n");
    out.push_str(&serialize_bgf(&result.source));
    out.push_str("```\n\n");

    if !result.mutations.is_empty() {
        out.push_str("## Mutations\n\n");
        steps(&mut out, &result.mutations);
    }

    out.push_str("## Normalizations\n\n");
    if result.normalization.is_empty() {
        out.push_str("The grammar is already in ANF.\n\n");
    } else {
        steps(&mut out, &result.normalization);
    }

    out.push_str("## Grammar in ANF\n\n| Nonterminal | Definition |\n|---|---|\n");
    for p in &result.anf.productions {
        let _ = writeln!(out, "| {} | `{}` |", p.lhs, cell(&serialize_expression(&p.rhs)));
    }
    let _ = writeln!(out, "\nRoots: {}\n", result.anf.roots.join(", "));

    out.push_str("## Nominal resolution\n\n| Servant | Master |\n|---|---|\n");
    for (s, t) in &result.matching.mapping.pairs {
        let _ = writeln!(out, "| {s} | {} |", t.as_deref().unwrap_or("ω"));
    }
    out.push('\n');
    for m in &result.matching.matches {
        let line = match (&m.master, &m.kind) {
            (Some(q), Some(kind)) => format!(
                "- `{}` {} `{}`",
                render_production(&m.servant),
                kind.symbol(),
                render_production(q)
            ),
            _ => format!("- `{}` unmatched", render_production(&m.servant)),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out.push('\n');
    if options.show_noop_renames {
        for (s, t) in &result.matching.mapping.pairs {
            if t.as_deref() == Some(s.as_str()) {
                let _ = writeln!(out, "- `renameN({s}, {s})` skipped");
            }
        }
    }
    if result.renames.is_empty() {
        out.push_str("No renaming needed.\n\n");
    } else {
        steps(&mut out, &result.renames);
    }

    if !result.structural.is_empty() {
        out.push_str("## Structural resolution\n\n");
        steps(&mut out, &result.structural);
    }

    let verdict = if verify(result, master) {
        "converged: the result equals the master grammar"
    } else {
        "not converged: the result differs from the master grammar"
    };
    let _ = writeln!(out, "**Result:** {verdict}.");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgf::parse_bgf;
    use crate::converge::converge;

    #[test]
    fn self_report_omits_empty_sections() {
        let m = parse_bgf("roots: a ; a : b+ ; b : c ;").unwrap();
        let r = converge(&m, &m).unwrap();
        let text = generate_report("self", &r, &m, &ReportOptions::default());
        assert!(text.contains("## Nominal resolution"));
        assert!(!text.contains("## Mutations"));
        assert!(!text.contains("## Structural resolution"));
        assert!(text.contains("converged: the result equals"));
        let noop = generate_report(
            "self",
            &r,
            &m,
            &ReportOptions {
                show_noop_renames: true,
            },
        );
        assert!(noop.contains("renameN(a, a)"));
    }
}
