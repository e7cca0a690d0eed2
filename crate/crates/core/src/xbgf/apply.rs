//! Operator semantics. Every application returns the completed step, whose
//! payload is enough for [`super::invert_step`] to undo it exactly.

use std::collections::HashSet;

use crate::bgf::{is_identifier, Expression, Grammar, Production};

use super::step::{Location, Rewrite, Scope, Step};
use super::XbgfError;

type Applied = Result<(Grammar, Step), XbgfError>;

fn violated(msg: impl Into<String>) -> XbgfError {
    XbgfError::PreconditionViolated(msg.into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), XbgfError> {
    if cond {
        Ok(())
    } else {
        Err(violated(msg()))
    }
}

fn locate(g: &Grammar, p: &Production) -> Result<usize, XbgfError> {
    g.find(p)
        .ok_or_else(|| XbgfError::TargetNotFound(p.to_string()))
}

fn replace_at(g: &Grammar, i: usize, p: Production) -> Grammar {
    let mut out = g.clone();
    out.productions[i] = p;
    out
}

fn same_lhs(productions: &[Production]) -> Result<&str, XbgfError> {
    let first = productions
        .first()
        .ok_or_else(|| violated("empty production list"))?;
    ensure(productions.iter().all(|p| p.lhs == first.lhs), || {
        format!("productions define more than one nonterminal ({})", first.lhs)
    })?;
    Ok(&first.lhs)
}

fn label_clash(g: &Grammar, lhs: &str, label: &str) -> bool {
    !label.is_empty() && g.productions.iter().any(|p| p.lhs == lhs && p.label == label)
}

fn check_labels(g: &Grammar) -> Result<(), XbgfError> {
    let mut seen = HashSet::new();
    for p in g.productions.iter().filter(|p| p.is_labeled()) {
        if !seen.insert((&p.lhs, &p.label)) {
            return Err(XbgfError::NameClash(format!(
                "label [{}] used twice for {}",
                p.label, p.lhs
            )));
        }
    }
    Ok(())
}

/// Replaces, for each rewrite, the first not yet rewritten production equal
/// to `before` by `after`.
fn apply_rewrites(g: &mut Grammar, rewrites: &[Rewrite]) -> Result<(), XbgfError> {
    let mut touched = HashSet::new();
    for rw in rewrites {
        let i = g
            .productions
            .iter()
            .enumerate()
            .position(|(i, p)| !touched.contains(&i) && *p == rw.before)
            .ok_or_else(|| XbgfError::TargetNotFound(rw.before.to_string()))?;
        touched.insert(i);
        g.productions[i] = rw.after.clone();
    }
    Ok(())
}

/// Collapses ε: dropped from sequences, absorbed by iterations and
/// selectors; an all-ε choice is ε and a binary choice with one ε is an
/// optional.
pub fn absorb_epsilon(e: &Expression) -> Result<Expression, XbgfError> {
    use Expression::*;
    Ok(match e {
        Sequence(xs) => {
            let mut parts = Vec::new();
            for x in xs {
                let x = absorb_epsilon(x)?;
                if x != Epsilon {
                    parts.push(x);
                }
            }
            Expression::seq(parts)
        }
        Choice(xs) => {
            let alts = xs.iter().map(absorb_epsilon).collect::<Result<Vec<_>, _>>()?;
            let eps = alts.iter().filter(|a| **a == Epsilon).count();
            if eps == alts.len() {
                Epsilon
            } else if eps == 0 {
                Choice(alts)
            } else if alts.len() == 2 {
                Expression::opt(alts.into_iter().find(|a| *a != Epsilon).unwrap())
            } else {
                return Err(violated(format!(
                    "choice mixes ε with {} other alternatives",
                    alts.len() - eps
                )));
            }
        }
        Star(x) | Plus(x) | Optional(x) => {
            let inner = absorb_epsilon(x)?;
            if inner == Epsilon {
                Epsilon
            } else {
                match e {
                    Star(_) => Expression::star(inner),
                    Plus(_) => Expression::plus(inner),
                    _ => Expression::opt(inner),
                }
            }
        }
        Selector(n, x) => match absorb_epsilon(x)? {
            Epsilon => Epsilon,
            inner => Expression::sel(n.clone(), inner),
        },
        SeparatedPlus(item, sep) => {
            let (item, sep) = (absorb_epsilon(item)?, absorb_epsilon(sep)?);
            match (&item, &sep) {
                (Epsilon, Epsilon) => Epsilon,
                (_, Epsilon) => Expression::plus(item),
                _ => Expression::sep_plus(item, sep),
            }
        }
        other => other.clone(),
    })
}

fn has_selector(e: &Expression) -> bool {
    e.contains(|x| matches!(x, Expression::Selector(..)))
}

fn has_terminal(e: &Expression) -> bool {
    e.contains(|x| matches!(x, Expression::Terminal(_)))
}

/// The selector-free image of a production rhs.
pub fn anonymized(e: &Expression) -> Result<Expression, XbgfError> {
    absorb_epsilon(&e.transform(&mut |x| match x {
        Expression::Selector(_, inner) => *inner,
        other => other,
    }))
}

/// The terminal-free image of a production rhs.
pub fn abstracted(e: &Expression) -> Result<Expression, XbgfError> {
    absorb_epsilon(&e.transform(&mut |x| match x {
        Expression::Terminal(_) => Expression::Epsilon,
        other => other,
    }))
}

/// `seq([X, *(seq([O, X]))])` or `seq([*(seq([X, O])), X])` to `seq([X, O, X])`.
pub fn assoc_image(e: &Expression) -> Option<Expression> {
    let Expression::Sequence(xs) = e else {
        return None;
    };
    let [a, b] = xs.as_slice() else {
        return None;
    };
    let triple = |x: &Expression, o: &Expression| {
        Expression::Sequence(vec![x.clone(), o.clone(), x.clone()])
    };
    if let Expression::Star(inner) = b {
        if let Expression::Sequence(ys) = inner.as_ref() {
            if let [o, x] = ys.as_slice() {
                if x == a {
                    return Some(triple(a, o));
                }
            }
        }
    }
    if let Expression::Star(inner) = a {
        if let Expression::Sequence(ys) = inner.as_ref() {
            if let [x, o] = ys.as_slice() {
                if x == b {
                    return Some(triple(b, o));
                }
            }
        }
    }
    None
}

fn projected(p: &Production, positions: &[usize]) -> Result<Production, XbgfError> {
    let Expression::Sequence(xs) = &p.rhs else {
        return Err(violated(format!("{p} is not a sequence")));
    };
    ensure(!positions.is_empty(), || "no positions to project".into())?;
    ensure(positions.windows(2).all(|w| w[0] < w[1]), || {
        "positions must be strictly increasing".into()
    })?;
    ensure(*positions.last().unwrap() < xs.len(), || {
        format!("position out of range for {p}")
    })?;
    let kept = xs
        .iter()
        .enumerate()
        .filter(|(i, _)| !positions.contains(i))
        .map(|(_, x)| x.clone())
        .collect();
    Ok(Production::new(p.label.clone(), p.lhs.clone(), Expression::seq(kept)))
}

/// Every unlabeled top-level choice becomes one production per alternative.
fn flatten_choices(ps: &[Production]) -> Result<Vec<Production>, XbgfError> {
    let mut out = Vec::new();
    for p in ps {
        match &p.rhs {
            Expression::Choice(alts) => {
                ensure(!p.is_labeled(), || format!("{p} is labeled"))?;
                out.extend(alts.iter().map(|a| Production::unlabeled(p.lhs.clone(), a.clone())));
            }
            _ => out.push(p.clone()),
        }
    }
    Ok(out)
}

fn same_multiset(a: &[Production], b: &[Production]) -> bool {
    let mut a: Vec<&Production> = a.iter().collect();
    let mut b: Vec<&Production> = b.iter().collect();
    a.sort();
    b.sort();
    a == b
}

/// The definitions of `nt` replaced by `with`, placed where the first one was.
fn replace_definitions(g: &Grammar, nt: &str, with: Vec<Production>) -> Grammar {
    let mut productions = Vec::new();
    let mut with = Some(with);
    for p in &g.productions {
        if p.lhs != nt {
            productions.push(p.clone());
        } else if let Some(ps) = with.take() {
            productions.extend(ps);
        }
    }
    productions.extend(with.into_iter().flatten());
    Grammar {
        roots: g.roots.clone(),
        productions,
    }
}

/// Top-down, non-overlapping occurrences of `target` in `e`.
fn find_paths(e: &Expression, target: &Expression, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if e == target {
        out.push(path.clone());
        return;
    }
    for (i, c) in e.children().into_iter().enumerate() {
        path.push(i);
        find_paths(c, target, path, out);
        path.pop();
    }
}

fn narrowing(from: &Expression, to: &Expression) -> bool {
    match (from, to) {
        (Expression::Star(a), Expression::Plus(b)) => a == b,
        (Expression::Optional(a), b) => a.as_ref() == b,
        _ => false,
    }
}

fn change_multiplicity(
    g: &Grammar,
    scope: &str,
    from: &Expression,
    to: &Expression,
    at: &Option<Location>,
) -> Result<(Grammar, Location), XbgfError> {
    let indices = g.definition_indices(scope);
    ensure(!indices.is_empty(), || format!("{scope} is not defined"))?;
    let shown = crate::bgf::serialize_expression(from);
    let (i, location) = match at {
        Some(loc) => {
            ensure(loc.production.lhs == scope, || format!("{} is not a definition of {scope}", loc.production))?;
            let i = locate(g, &loc.production)?;
            ensure(loc.production.rhs.at_path(&loc.path) == Some(from), || {
                format!("{shown} does not occur at the recorded position in {scope}")
            })?;
            (i, loc.clone())
        }
        None => {
            let mut found = Vec::new();
            for &i in &indices {
                let mut paths = Vec::new();
                find_paths(&g.productions[i].rhs, from, &mut Vec::new(), &mut paths);
                found.extend(paths.into_iter().map(|path| (i, path)));
            }
            match found.len() {
                0 => return Err(violated(format!("{shown} does not occur in {scope}"))),
                1 => {
                    let (i, path) = found.pop().unwrap();
                    let production = g.productions[i].clone();
                    (i, Location { production, path })
                }
                n => {
                    return Err(XbgfError::AmbiguousTarget(format!(
                        "{shown} occurs {n} times in {scope}"
                    )))
                }
            }
        }
    };
    let mut out = g.clone();
    *out.productions[i]
        .rhs
        .at_path_mut(&location.path)
        .expect("location checked") = to.clone();
    Ok((out, location))
}

fn fresh_nonterminal(g: &Grammar, nt: &str) -> Result<(), XbgfError> {
    if g.mentions(nt) {
        Err(XbgfError::NameClash(format!("{nt} already occurs in the grammar")))
    } else {
        Ok(())
    }
}

pub fn apply_step(g: &Grammar, s: &Step) -> Applied {
    match s {
        Step::RenameN { from, to } => {
            ensure(from != to, || format!("renaming {from} to itself"))?;
            ensure(g.mentions(from), || format!("{from} does not occur"))?;
            ensure(is_identifier(to), || format!("`{to}` is not a nonterminal name"))?;
            fresh_nonterminal(g, to)?;
            let out = Grammar {
                roots: g
                    .roots
                    .iter()
                    .map(|r| if r == from { to.clone() } else { r.clone() })
                    .collect(),
                productions: g.productions.iter().map(|p| p.rename(from, to)).collect(),
            };
            Ok((out, s.clone()))
        }
        Step::Reroot { to, .. } => {
            let mut seen = HashSet::new();
            for r in to {
                ensure(seen.insert(r), || format!("root {r} listed twice"))?;
                ensure(g.is_defined(r) || g.is_used(r), || format!("root {r} does not occur"))?;
            }
            let out = Grammar {
                roots: to.clone(),
                productions: g.productions.clone(),
            };
            let done = Step::Reroot {
                from: g.roots.clone(),
                to: to.clone(),
            };
            Ok((out, done))
        }
        Step::Unlabel { production } => {
            ensure(production.is_labeled(), || format!("{production} has no label"))?;
            let i = locate(g, production)?;
            let mut p = production.clone();
            p.label.clear();
            Ok((replace_at(g, i, p), s.clone()))
        }
        Step::Designate { production } => {
            ensure(production.is_labeled(), || "designate needs a label".into())?;
            let target = Production::unlabeled(production.lhs.clone(), production.rhs.clone());
            let i = locate(g, &target)?;
            if label_clash(g, &production.lhs, &production.label) {
                return Err(XbgfError::NameClash(format!(
                    "[{}] {} already exists",
                    production.label, production.lhs
                )));
            }
            Ok((replace_at(g, i, production.clone()), s.clone()))
        }
        Step::Anonymize { production } | Step::Abstractize { production } => {
            let anon = matches!(s, Step::Anonymize { .. });
            let i = locate(g, production)?;
            if anon {
                ensure(has_selector(&production.rhs), || format!("{production} has no selectors"))?;
            } else {
                ensure(has_terminal(&production.rhs), || format!("{production} has no terminals"))?;
            }
            let rhs = if anon {
                anonymized(&production.rhs)?
            } else {
                abstracted(&production.rhs)?
            };
            let p = Production::new(production.label.clone(), production.lhs.clone(), rhs);
            Ok((replace_at(g, i, p), s.clone()))
        }
        Step::Deanonymize { production } | Step::Concretize { production } => {
            let anon = matches!(s, Step::Deanonymize { .. });
            let (ok, rhs) = if anon {
                (has_selector(&production.rhs), anonymized(&production.rhs)?)
            } else {
                (has_terminal(&production.rhs), abstracted(&production.rhs)?)
            };
            ensure(ok, || format!("{production} adds nothing"))?;
            let target = Production::new(production.label.clone(), production.lhs.clone(), rhs);
            let i = locate(g, &target)?;
            Ok((replace_at(g, i, production.clone()), s.clone()))
        }
        Step::Vertical { nt, saved } => {
            let before: Vec<Production> = g.definitions(nt).cloned().collect();
            if let Some(saved) = saved {
                ensure(same_multiset(saved, &before), || {
                    format!("definitions of {nt} differ from the recorded ones")
                })?;
            }
            let split = flatten_choices(&before)?;
            ensure(split.len() > before.len(), || format!("{nt} has no choice production"))?;
            let done = Step::Vertical {
                nt: nt.clone(),
                saved: Some(before),
            };
            Ok((replace_definitions(g, nt, split), done))
        }
        Step::Horizontal { nt, into } => {
            let before: Vec<Production> = g.definitions(nt).cloned().collect();
            let into = match into {
                Some(into) => {
                    ensure(into.iter().all(|p| p.lhs == *nt), || format!("target is not a definition of {nt}"))?;
                    ensure(same_multiset(&flatten_choices(into)?, &before), || {
                        format!("the definitions of {nt} are not the alternatives of the target")
                    })?;
                    into.clone()
                }
                None => {
                    ensure(before.len() > 1, || format!("nothing to merge in {nt}"))?;
                    ensure(before.iter().all(|p| !p.is_labeled()), || format!("a definition of {nt} is labeled"))?;
                    let alts = before.iter().map(|p| p.rhs.clone()).collect();
                    vec![Production::unlabeled(nt.clone(), Expression::Choice(alts))]
                }
            };
            ensure(into.len() < before.len(), || format!("nothing to merge in {nt}"))?;
            let done = Step::Horizontal {
                nt: nt.clone(),
                into: Some(into.clone()),
            };
            Ok((replace_definitions(g, nt, into), done))
        }
        Step::Undefine { nt, .. } | Step::Eliminate { nt, .. } => {
            let eliminate = matches!(s, Step::Eliminate { .. });
            ensure(g.is_defined(nt), || format!("{nt} is not defined"))?;
            if eliminate {
                ensure(!g.is_root(nt), || format!("{nt} is a root"))?;
                let used_elsewhere = g
                    .productions
                    .iter()
                    .any(|p| p.lhs != *nt && p.rhs.mentions(nt));
                ensure(!used_elsewhere, || format!("{nt} is still used"))?;
            }
            let saved: Vec<Production> = g.definitions(nt).cloned().collect();
            let out = Grammar {
                roots: g.roots.clone(),
                productions: g.productions.iter().filter(|p| p.lhs != *nt).cloned().collect(),
            };
            let done = if eliminate {
                Step::Eliminate {
                    nt: nt.clone(),
                    saved: Some(saved),
                }
            } else {
                Step::Undefine {
                    nt: nt.clone(),
                    saved: Some(saved),
                }
            };
            Ok((out, done))
        }
        Step::Define { productions } | Step::Introduce { productions } => {
            let nt = same_lhs(productions)?;
            if matches!(s, Step::Introduce { .. }) {
                fresh_nonterminal(g, nt)?;
            } else {
                ensure(!g.is_defined(nt), || format!("{nt} is already defined"))?;
            }
            let mut out = g.clone();
            out.productions.extend(productions.iter().cloned());
            check_labels(&out)?;
            Ok((out, s.clone()))
        }
        Step::Unchain { chain, .. } => {
            let i = locate(g, chain)?;
            let y = chain
                .chain_target()
                .ok_or_else(|| violated(format!("{chain} is not a chain")))?;
            let x = &chain.lhs;
            ensure(x != y, || format!("{chain} is reflexive"))?;
            ensure(!g.is_root(y), || format!("{y} is a root"))?;
            let defs = g.definition_indices(y);
            ensure(defs.len() == 1, || format!("{y} has {} definitions", defs.len()))?;
            ensure(g.occurrences(y) == 1, || format!("{y} is used more than once"))?;
            if label_clash(g, x, y) {
                return Err(XbgfError::NameClash(format!("[{y}] {x} already exists")));
            }
            let d = defs[0];
            let definition = g.productions[d].clone();
            let mut out = g.clone();
            out.productions[d] = Production::new(y, x.clone(), definition.rhs.clone());
            out.productions.remove(i);
            let done = Step::Unchain {
                chain: chain.clone(),
                definition: Some(definition),
            };
            Ok((out, done))
        }
        Step::Chain { chain, definition } => {
            let y = chain
                .chain_target()
                .ok_or_else(|| violated(format!("{chain} is not a chain")))?;
            ensure(definition.lhs == y, || format!("{definition} does not define {y}"))?;
            let merged = Production::new(y, chain.lhs.clone(), definition.rhs.clone());
            let i = locate(g, &merged)?;
            fresh_nonterminal(g, y)?;
            let mut out = replace_at(g, i, definition.clone());
            out.productions.push(chain.clone());
            check_labels(&out)?;
            Ok((out, s.clone()))
        }
        Step::Abridge { production } => {
            ensure(production.chain_target() == Some(production.lhs.as_str()), || {
                format!("{production} is not a reflexive chain")
            })?;
            let i = locate(g, production)?;
            let mut out = g.clone();
            out.productions.remove(i);
            Ok((out, s.clone()))
        }
        Step::Detour { production } => {
            ensure(production.chain_target() == Some(production.lhs.as_str()), || {
                format!("{production} is not a reflexive chain")
            })?;
            let mut out = g.clone();
            out.productions.push(production.clone());
            check_labels(&out)?;
            Ok((out, s.clone()))
        }
        Step::Extract {
            production,
            scope,
            rewrites,
        } => {
            let x = &production.lhs;
            ensure(is_identifier(x), || format!("`{x}` is not a nonterminal name"))?;
            fresh_nonterminal(g, x)?;
            let mut out = g.clone();
            let rewrites = match rewrites {
                Some(rw) => {
                    apply_rewrites(&mut out, rw)?;
                    rw.clone()
                }
                None => {
                    let with = Expression::nt(x.clone());
                    let mut done = Vec::new();
                    for p in out.productions.iter_mut() {
                        if let Scope::In(nt) = scope {
                            if p.lhs != *nt {
                                continue;
                            }
                        }
                        let before = p.clone();
                        if p.rhs.replace_all(&production.rhs, &with) > 0 {
                            done.push(Rewrite {
                                before,
                                after: p.clone(),
                            });
                        }
                    }
                    ensure(!done.is_empty(), || {
                        format!("{} does not occur in scope", production.rhs)
                    })?;
                    done
                }
            };
            out.productions.push(production.clone());
            let done = Step::Extract {
                production: production.clone(),
                scope: scope.clone(),
                rewrites: Some(rewrites),
            };
            Ok((out, done))
        }
        Step::Inline { nt, saved } => {
            let defs = g.definition_indices(nt);
            ensure(defs.len() == 1, || format!("{nt} has {} definitions", defs.len()))?;
            ensure(!g.is_root(nt), || format!("{nt} is a root"))?;
            let definition = g.productions[defs[0]].clone();
            ensure(!definition.rhs.mentions(nt), || format!("{nt} is recursive"))?;
            let mut out = g.clone();
            out.productions.remove(defs[0]);
            let rewrites = match saved {
                Some((def, rw)) => {
                    ensure(*def == definition, || format!("recorded definition of {nt} differs"))?;
                    apply_rewrites(&mut out, rw)?;
                    ensure(!out.mentions(nt), || format!("{nt} still occurs after inlining"))?;
                    rw.clone()
                }
                None => {
                    let mut done = Vec::new();
                    for p in out.productions.iter_mut() {
                        if !p.rhs.mentions(nt) {
                            continue;
                        }
                        let before = p.clone();
                        p.rhs = p.rhs.transform(&mut |e| match e {
                            Expression::Nonterminal(n) if n == *nt => definition.rhs.clone(),
                            other => other,
                        });
                        done.push(Rewrite {
                            before,
                            after: p.clone(),
                        });
                    }
                    done
                }
            };
            let done = Step::Inline {
                nt: nt.clone(),
                saved: Some((definition, rewrites)),
            };
            Ok((out, done))
        }
        Step::Project {
            production,
            positions,
        } => {
            let i = locate(g, production)?;
            let p = projected(production, positions)?;
            Ok((replace_at(g, i, p), s.clone()))
        }
        Step::Inject {
            production,
            positions,
        } => {
            let target = projected(production, positions)?;
            let i = locate(g, &target)?;
            Ok((replace_at(g, i, production.clone()), s.clone()))
        }
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
            let narrow = matches!(s, Step::Narrow { .. });
            let supported = if narrow {
                narrowing(from, to)
            } else {
                narrowing(to, from)
            };
            ensure(supported, || {
                format!(
                    "unsupported {} from {} to {}",
                    s.kind().name(),
                    crate::bgf::serialize_expression(from),
                    crate::bgf::serialize_expression(to)
                )
            })?;
            let (out, location) = change_multiplicity(g, scope, from, to, at)?;
            let (scope, from, to, at) = (scope.clone(), from.clone(), to.clone(), Some(location));
            let done = if narrow {
                Step::Narrow { scope, from, to, at }
            } else {
                Step::Widen { scope, from, to, at }
            };
            Ok((out, done))
        }
        Step::Permute { production, to } => {
            let i = locate(g, production)?;
            let (Expression::Sequence(old), Expression::Sequence(new)) = (&production.rhs, to) else {
                return Err(violated("permute needs two sequences"));
            };
            let (mut a, mut b) = (old.clone(), new.clone());
            a.sort();
            b.sort();
            ensure(a == b, || format!("{} is not a permutation of {}", to, production.rhs))?;
            ensure(old != new, || "permutation is the identity".into())?;
            let p = Production::new(production.label.clone(), production.lhs.clone(), to.clone());
            Ok((replace_at(g, i, p), s.clone()))
        }
        Step::Unite {
            from,
            into,
            rewrites,
        } => {
            ensure(from != into, || format!("uniting {from} with itself"))?;
            ensure(!g.is_root(from), || format!("{from} is a root"))?;
            ensure(is_identifier(into), || format!("`{into}` is not a nonterminal name"))?;
            let mut out = g.clone();
            let rewrites = match rewrites {
                Some(rw) => {
                    apply_rewrites(&mut out, rw)?;
                    rw.clone()
                }
                None => {
                    let mut done = Vec::new();
                    for p in out.productions.iter_mut() {
                        let after = p.rename(from, into);
                        if after != *p {
                            done.push(Rewrite {
                                before: p.clone(),
                                after: after.clone(),
                            });
                            *p = after;
                        }
                    }
                    ensure(!done.is_empty(), || format!("{from} does not occur"))?;
                    done
                }
            };
            ensure(!out.mentions(from), || format!("{from} still occurs after unite"))?;
            check_labels(&out)?;
            let done = Step::Unite {
                from: from.clone(),
                into: into.clone(),
                rewrites: Some(rewrites),
            };
            Ok((out, done))
        }
        Step::SplitN {
            from, rewrites, ..
        } => {
            fresh_nonterminal(g, from)?;
            let mut out = g.clone();
            apply_rewrites(&mut out, rewrites)?;
            check_labels(&out)?;
            Ok((out, s.clone()))
        }
        Step::Assoc { production } => {
            let i = locate(g, production)?;
            let rhs = assoc_image(&production.rhs)
                .ok_or_else(|| violated(format!("{production} is not in iteration form")))?;
            let p = Production::new(production.label.clone(), production.lhs.clone(), rhs);
            Ok((replace_at(g, i, p), s.clone()))
        }
        Step::Iterate { production } => {
            let rhs = assoc_image(&production.rhs)
                .ok_or_else(|| violated(format!("{production} is not in iteration form")))?;
            let target = Production::new(production.label.clone(), production.lhs.clone(), rhs);
            let i = locate(g, &target)?;
            Ok((replace_at(g, i, production.clone()), s.clone()))
        }
    }
}
