//! Script text format: one `opname(args)` per line, `#` comments.
//! Productions are written `p('label', lhs, rhs)` with a BGF rhs.

use crate::bgf::{serialize_expression, BgfError, Parser, Production, Tok};

use super::step::{Location, Rewrite, Scope, Step, StepKind};

fn prod(p: &Production) -> String {
    format!("p('{}', {}, {})", p.label, p.lhs, serialize_expression(&p.rhs))
}

fn prods(ps: &[Production]) -> String {
    format!("[{}]", ps.iter().map(prod).collect::<Vec<_>>().join(", "))
}

fn names(ns: &[String]) -> String {
    format!("[{}]", ns.join(", "))
}

fn numbers(ns: &[usize]) -> String {
    format!(
        "[{}]",
        ns.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")
    )
}

fn rewrites(rw: &[Rewrite]) -> String {
    let before: Vec<Production> = rw.iter().map(|r| r.before.clone()).collect();
    let after: Vec<Production> = rw.iter().map(|r| r.after.clone()).collect();
    format!("{}, {}", prods(&before), prods(&after))
}

/// One step in script syntax, payload included.
pub fn render_step(s: &Step) -> String {
    let args = match s {
        Step::RenameN { from, to } => format!("{from}, {to}"),
        Step::Reroot { from, to } => format!("{}, {}", names(from), names(to)),
        Step::Unlabel { production }
        | Step::Designate { production }
        | Step::Anonymize { production }
        | Step::Deanonymize { production }
        | Step::Abstractize { production }
        | Step::Concretize { production }
        | Step::Abridge { production }
        | Step::Detour { production }
        | Step::Assoc { production }
        | Step::Iterate { production } => prod(production),
        Step::Vertical { nt, saved: ps } | Step::Horizontal { nt, into: ps } => match ps {
            Some(ps) => format!("{nt}, {}", prods(ps)),
            None => nt.clone(),
        },
        Step::Undefine { nt, saved } | Step::Eliminate { nt, saved } => match saved {
            Some(ps) => format!("{nt}, {}", prods(ps)),
            None => nt.clone(),
        },
        Step::Define { productions } | Step::Introduce { productions } => prods(productions),
        Step::Unchain { chain, definition } => match definition {
            Some(d) => format!("{}, {}", prod(chain), prod(d)),
            None => prod(chain),
        },
        Step::Chain { chain, definition } => format!("{}, {}", prod(chain), prod(definition)),
        Step::Extract {
            production,
            scope,
            rewrites: rw,
        } => {
            let scope = match scope {
                Scope::Global => "*".to_string(),
                Scope::In(nt) => nt.clone(),
            };
            match rw {
                Some(rw) => format!("{}, {scope}, {}", prod(production), rewrites(rw)),
                None => format!("{}, {scope}", prod(production)),
            }
        }
        Step::Inline { nt, saved } => match saved {
            Some((d, rw)) => format!("{nt}, {}, {}", prod(d), rewrites(rw)),
            None => nt.clone(),
        },
        Step::Project {
            production,
            positions,
        }
        | Step::Inject {
            production,
            positions,
        } => format!("{}, {}", prod(production), numbers(positions)),
        Step::Narrow {
            scope,
            from,
            to,
            at,
        }
        | Step::Widen {
            scope,
            from,
            to,
            at,
        } => {
            let base = format!(
                "{scope}, {}, {}",
                serialize_expression(from),
                serialize_expression(to)
            );
            match at {
                Some(loc) => format!("{base}, {}, {}", prod(&loc.production), numbers(&loc.path)),
                None => base,
            }
        }
        Step::Permute { production, to } => {
            format!("{}, {}", prod(production), serialize_expression(to))
        }
        Step::Unite {
            from,
            into,
            rewrites: rw,
        } => match rw {
            Some(rw) => format!("{from}, {into}, {}", rewrites(rw)),
            None => format!("{from}, {into}"),
        },
        Step::SplitN {
            from,
            into,
            rewrites: rw,
        } => format!("{from}, {into}, {}", rewrites(rw)),
    };
    format!("{}({args})", s.kind().name())
}

pub fn serialize_script(script: &[Step]) -> String {
    script.iter().map(|s| render_step(s) + "\n").collect()
}

struct StepParser {
    p: Parser,
}

impl StepParser {
    fn comma(&mut self) -> Result<(), BgfError> {
        self.p.expect(Tok::Comma)
    }

    /// `, ` followed by more arguments, or the closing parenthesis.
    fn more(&mut self) -> Result<bool, BgfError> {
        if self.p.eat(&Tok::Comma) {
            Ok(true)
        } else if *self.p.peek() == Tok::RParen {
            Ok(false)
        } else {
            Err(self.p.unexpected("`,` or `)`"))
        }
    }

    fn production(&mut self) -> Result<Production, BgfError> {
        match self.p.next() {
            Tok::Ident(s) if s == "p" => {}
            _ => return Err(self.p.error("expected production `p(...)`")),
        }
        self.p.expect(Tok::LParen)?;
        let label = match self.p.next() {
            Tok::Quoted(l) => l,
            _ => return Err(self.p.error("expected quoted label")),
        };
        self.comma()?;
        let lhs = self.p.nonterminal()?;
        self.comma()?;
        let rhs = self.p.expression()?;
        self.p.expect(Tok::RParen)?;
        Ok(Production::new(label, lhs, rhs))
    }

    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, BgfError>) -> Result<Vec<T>, BgfError> {
        self.p.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        if self.p.eat(&Tok::RBracket) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.p.eat(&Tok::RBracket) {
                return Ok(out);
            }
            self.comma()?;
        }
    }

    fn productions(&mut self) -> Result<Vec<Production>, BgfError> {
        self.list(|s| s.production())
    }

    fn numbers(&mut self) -> Result<Vec<usize>, BgfError> {
        self.list(|s| s.p.number())
    }

    fn rewrites(&mut self) -> Result<Vec<Rewrite>, BgfError> {
        let before = self.productions()?;
        self.comma()?;
        let after = self.productions()?;
        if before.len() != after.len() {
            return Err(self.p.error("rewrite lists differ in length"));
        }
        Ok(before
            .into_iter()
            .zip(after)
            .map(|(before, after)| Rewrite { before, after })
            .collect())
    }

    fn step(&mut self) -> Result<Step, BgfError> {
        let name = self.p.ident()?;
        let kind = StepKind::from_name(&name)
            .ok_or_else(|| self.p.error(format!("unknown operator `{name}`")))?;
        self.p.expect(Tok::LParen)?;
        let step = match kind {
            StepKind::RenameN => {
                let from = self.p.nonterminal()?;
                self.comma()?;
                Step::RenameN {
                    from,
                    to: self.p.nonterminal()?,
                }
            }
            StepKind::Reroot => {
                let from = self.list(|s| s.p.nonterminal())?;
                self.comma()?;
                Step::Reroot {
                    from,
                    to: self.list(|s| s.p.nonterminal())?,
                }
            }
            StepKind::Unlabel
            | StepKind::Designate
            | StepKind::Anonymize
            | StepKind::Deanonymize
            | StepKind::Abstractize
            | StepKind::Concretize
            | StepKind::Abridge
            | StepKind::Detour
            | StepKind::Assoc
            | StepKind::Iterate => {
                let production = self.production()?;
                match kind {
                    StepKind::Unlabel => Step::Unlabel { production },
                    StepKind::Designate => Step::Designate { production },
                    StepKind::Anonymize => Step::Anonymize { production },
                    StepKind::Deanonymize => Step::Deanonymize { production },
                    StepKind::Abstractize => Step::Abstractize { production },
                    StepKind::Concretize => Step::Concretize { production },
                    StepKind::Abridge => Step::Abridge { production },
                    StepKind::Detour => Step::Detour { production },
                    StepKind::Assoc => Step::Assoc { production },
                    _ => Step::Iterate { production },
                }
            }
            StepKind::Vertical | StepKind::Horizontal => {
                let nt = self.p.nonterminal()?;
                let ps = if self.more()? { Some(self.productions()?) } else { None };
                if kind == StepKind::Vertical {
                    Step::Vertical { nt, saved: ps }
                } else {
                    Step::Horizontal { nt, into: ps }
                }
            }
            StepKind::Undefine | StepKind::Eliminate => {
                let nt = self.p.nonterminal()?;
                let saved = if self.more()? { Some(self.productions()?) } else { None };
                if kind == StepKind::Undefine {
                    Step::Undefine { nt, saved }
                } else {
                    Step::Eliminate { nt, saved }
                }
            }
            StepKind::Define => Step::Define {
                productions: self.productions()?,
            },
            StepKind::Introduce => Step::Introduce {
                productions: self.productions()?,
            },
            StepKind::Unchain => {
                let chain = self.production()?;
                let definition = if self.more()? { Some(self.production()?) } else { None };
                Step::Unchain { chain, definition }
            }
            StepKind::Chain => {
                let chain = self.production()?;
                self.comma()?;
                Step::Chain {
                    chain,
                    definition: self.production()?,
                }
            }
            StepKind::Extract => {
                let production = self.production()?;
                let mut scope = Scope::Global;
                let mut rw = None;
                if self.more()? {
                    if !self.p.eat(&Tok::Star) {
                        scope = Scope::In(self.p.nonterminal()?);
                    }
                    if self.more()? {
                        rw = Some(self.rewrites()?);
                    }
                }
                Step::Extract {
                    production,
                    scope,
                    rewrites: rw,
                }
            }
            StepKind::Inline => {
                let nt = self.p.nonterminal()?;
                let saved = if self.more()? {
                    let d = self.production()?;
                    self.comma()?;
                    Some((d, self.rewrites()?))
                } else {
                    None
                };
                Step::Inline { nt, saved }
            }
            StepKind::Project | StepKind::Inject => {
                let production = self.production()?;
                self.comma()?;
                let positions = self.numbers()?;
                if kind == StepKind::Project {
                    Step::Project {
                        production,
                        positions,
                    }
                } else {
                    Step::Inject {
                        production,
                        positions,
                    }
                }
            }
            StepKind::Narrow | StepKind::Widen => {
                let scope = self.p.nonterminal()?;
                self.comma()?;
                let from = self.p.expression()?;
                self.comma()?;
                let to = self.p.expression()?;
                let at = if self.more()? {
                    let production = self.production()?;
                    self.comma()?;
                    Some(Location {
                        production,
                        path: self.numbers()?,
                    })
                } else {
                    None
                };
                if kind == StepKind::Narrow {
                    Step::Narrow { scope, from, to, at }
                } else {
                    Step::Widen { scope, from, to, at }
                }
            }
            StepKind::Permute => {
                let production = self.production()?;
                self.comma()?;
                Step::Permute {
                    production,
                    to: self.p.expression()?,
                }
            }
            StepKind::Unite | StepKind::SplitN => {
                let from = self.p.nonterminal()?;
                self.comma()?;
                let into = self.p.nonterminal()?;
                if kind == StepKind::Unite {
                    let rw = if self.more()? { Some(self.rewrites()?) } else { None };
                    Step::Unite {
                        from,
                        into,
                        rewrites: rw,
                    }
                } else {
                    self.comma()?;
                    Step::SplitN {
                        from,
                        into,
                        rewrites: self.rewrites()?,
                    }
                }
            }
        };
        self.p.expect(Tok::RParen)?;
        Ok(step)
    }
}

pub fn parse_script(text: &str) -> Result<Vec<Step>, BgfError> {
    let mut sp = StepParser {
        p: Parser::new(text)?,
    };
    let mut out = Vec::new();
    while !sp.p.at_eof() {
        out.push(sp.step()?);
    }
    Ok(out)
}

/// Convenience for tests and callers that build steps from text.
pub fn parse_step(text: &str) -> Result<Step, BgfError> {
    let mut steps = parse_script(text)?;
    match steps.len() {
        1 => Ok(steps.pop().unwrap()),
        n => Err(BgfError::Syntax {
            line: 1,
            column: 1,
            message: format!("expected one step, found {n}"),
        }),
    }
}
