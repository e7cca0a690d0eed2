//! End-to-end convergence of a servant grammar onto a master grammar:
//! targeted mutations, ANF normalization, signature matching, then nominal
//! and structural resolution.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::anf::{is_anf, normalize, AnfError};
use crate::bgf::{canonical_eq, Expression, Grammar, Production};
use crate::prodsig::{elements, match_grammars, MatchError, MatchKind, MatchResult, Mult, NominalMapping};
use crate::xbgf::{apply_step, assoc_image, Location, Script, Step, XbgfError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvergeError {
    #[error("mutation failed: {0}")]
    Mutation(XbgfError),
    #[error("normalization failed: {0}")]
    Normalize(#[from] AnfError),
    #[error("master grammar is not in ANF: {0}")]
    MasterNotAnf(String),
    #[error("matching failed: {0}")]
    Match(#[from] MatchError),
    #[error("nominal resolution failed: {0}")]
    Nominal(XbgfError),
    #[error("structural resolution failed: {0}")]
    Structural(XbgfError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceResult {
    pub source: Grammar,
    pub mutations: Script,
    pub normalization: Script,
    pub anf: Grammar,
    pub matching: MatchResult,
    pub renames: Script,
    pub structural: Script,
    pub final_grammar: Grammar,
}

impl ConvergenceResult {
    pub fn mapping(&self) -> &NominalMapping {
        &self.matching.mapping
    }
}

struct Recorder {
    g: Grammar,
    steps: Script,
}

impl Recorder {
    fn new(g: Grammar) -> Recorder {
        Recorder { g, steps: Vec::new() }
    }

    fn apply(&mut self, s: Step) -> Result<(), XbgfError> {
        let (g, done) = apply_step(&self.g, &s)?;
        self.g = g;
        self.steps.push(done);
        Ok(())
    }
}

fn reaches(g: &Grammar, from: &str, target: &str) -> bool {
    let mut seen = BTreeSet::new();
    let mut stack = vec![from.to_string()];
    while let Some(n) = stack.pop() {
        for p in g.definitions(&n) {
            for m in p.rhs.nonterminals() {
                if m == target {
                    return true;
                }
                if seen.insert(m.to_string()) {
                    stack.push(m.to_string());
                }
            }
        }
    }
    false
}

fn strip_selectors(e: &Expression) -> &Expression {
    match e {
        Expression::Selector(_, x) => strip_selectors(x),
        other => other,
    }
}

/// `B` when `e` is a sequence of plain terminals around exactly one
/// nonterminal `B`, with at least one terminal.
fn bracketed(e: &Expression) -> Option<&str> {
    let Expression::Sequence(xs) = e else {
        return None;
    };
    let mut inner = None;
    for x in xs {
        match strip_selectors(x) {
            Expression::Terminal(_) => {}
            Expression::Nonterminal(n) if inner.is_none() => inner = Some(n.as_str()),
            _ => return None,
        }
    }
    inner.filter(|_| xs.len() >= 2)
}

/// A non-root nonterminal one of whose alternatives only brackets a
/// nonterminal that reaches it back: `(from, into)` for unite.
fn bracket_cycle(g: &Grammar) -> Option<(String, String)> {
    for p in &g.productions {
        if g.is_root(&p.lhs) {
            continue;
        }
        let alternatives = match &p.rhs {
            Expression::Choice(alts) => alts.iter().collect(),
            other => vec![other],
        };
        for alt in alternatives {
            if let Some(b) = bracketed(alt) {
                if b != p.lhs && reaches(g, b, &p.lhs) {
                    return Some((p.lhs.clone(), b.to_string()));
                }
            }
        }
    }
    None
}

/// The assoc image with the selectors of the original elements kept.
fn selected_triple(rhs: &Expression) -> Option<Expression> {
    let Expression::Sequence(xs) = rhs else {
        return None;
    };
    let [a, b] = xs.as_slice() else {
        return None;
    };
    let pair = |e: &Expression| match strip_selectors(e) {
        Expression::Star(inner) => match strip_selectors(inner) {
            Expression::Sequence(ys) if ys.len() == 2 => Some((ys[0].clone(), ys[1].clone())),
            _ => None,
        },
        _ => None,
    };
    if let Some((o, c)) = pair(b) {
        return Some(Expression::Sequence(vec![a.clone(), o, c]));
    }
    let (x, o) = pair(a)?;
    Some(Expression::Sequence(vec![x, o, b.clone()]))
}

const TEMPORARY_LABEL: &str = "tmplabel";

/// Removes bracketing cycles (unite) and turns iterated binary operator
/// chains into plain binary productions (assoc).
pub fn trigger_mutations(g: &Grammar) -> Result<(Grammar, Script), XbgfError> {
    let mut r = Recorder::new(g.clone());
    while let Some((from, into)) = bracket_cycle(&r.g) {
        r.apply(Step::Unite {
            from,
            into,
            rewrites: None,
        })?;
    }
    let mut i = 0;
    while i < r.g.productions.len() {
        let p = r.g.productions[i].clone();
        i += 1;
        let Ok(anon) = crate::xbgf::anonymized(&p.rhs) else {
            continue;
        };
        let Some(image) = assoc_image(&anon) else {
            continue;
        };
        let mut current = p.clone();
        if !p.is_labeled() {
            current.label = TEMPORARY_LABEL.to_string();
            r.apply(Step::Designate {
                production: current.clone(),
            })?;
        }
        let has_selectors = anon != p.rhs;
        if has_selectors {
            r.apply(Step::Anonymize {
                production: current.clone(),
            })?;
        }
        r.apply(Step::Assoc {
            production: Production::new(current.label.clone(), current.lhs.clone(), anon.clone()),
        })?;
        let mut result = Production::new(current.label.clone(), current.lhs.clone(), image);
        if has_selectors {
            let triple = selected_triple(&p.rhs).expect("assoc shape with selectors");
            result.rhs = triple;
            r.apply(Step::Deanonymize {
                production: result.clone(),
            })?;
        }
        if !p.is_labeled() {
            r.apply(Step::Unlabel { production: result })?;
        }
    }
    Ok((r.g, r.steps))
}

fn fresh(g: &Grammar, base: &str) -> String {
    (1..)
        .map(|k| format!("{base}_tmp{k}"))
        .find(|n| !g.mentions(n))
        .expect("unbounded")
}

/// Renames servant nonterminals onto their master names. Identity pairs
/// and ω entries are skipped; clashes go through temporary names. Returns
/// the renamed grammar, the steps, and the final name of every servant
/// nonterminal that was touched.
pub fn nominal_resolution(
    g: &Grammar,
    mapping: &NominalMapping,
) -> Result<(Grammar, Script, HashMap<String, String>), XbgfError> {
    let mut r = Recorder::new(g.clone());
    let mut names: HashMap<String, String> = HashMap::new();
    let mut pending: Vec<(String, String)> = mapping
        .pairs
        .iter()
        .filter_map(|(s, t)| t.as_ref().filter(|t| *t != s).map(|t| (s.clone(), t.clone())))
        .collect();
    while !pending.is_empty() {
        let current = |names: &HashMap<String, String>, s: &str| {
            names.get(s).cloned().unwrap_or_else(|| s.to_string())
        };
        let ready = pending
            .iter()
            .position(|(_, t)| !r.g.mentions(t));
        if let Some(k) = ready {
            let (s, t) = pending.remove(k);
            r.apply(Step::RenameN {
                from: current(&names, &s),
                to: t.clone(),
            })?;
            names.insert(s, t);
            continue;
        }
        // Every target is occupied: move the occupant of the first one to a
        // temporary name; a pending occupant is renamed from there later.
        let t = pending[0].1.clone();
        let occupant = names
            .iter()
            .find(|(_, now)| **now == t)
            .map(|(orig, _)| orig.clone())
            .unwrap_or_else(|| t.clone());
        let temp = fresh(&r.g, &t);
        r.apply(Step::RenameN {
            from: t,
            to: temp.clone(),
        })?;
        names.insert(occupant, temp);
    }
    Ok((r.g, r.steps, names))
}

/// Reroot, projection of omitted elements, elimination of unmatched
/// nonterminals, narrowing and permutation. `g` is the renamed servant;
/// its productions correspond index-wise to `matching.matches`.
pub fn structural_resolution(
    g: &Grammar,
    master: &Grammar,
    matching: &MatchResult,
    names: &HashMap<String, String>,
) -> Result<(Grammar, Script), XbgfError> {
    let mut r = Recorder::new(g.clone());
    let renamed = |n: &str| names.get(n).cloned().unwrap_or_else(|| n.to_string());
    if r.g.roots != master.roots {
        r.apply(Step::Reroot {
            from: r.g.roots.clone(),
            to: master.roots.clone(),
        })?;
    }
    // Productions tracked by index; structural steps never reorder them.
    let mut pairs: Vec<(usize, Production)> = Vec::new();
    for (i, m) in matching.matches.iter().enumerate() {
        let Some(q) = &m.master else { continue };
        if let Some(MatchKind::Weak(evidence)) = &m.kind {
            let omitted: BTreeSet<String> = evidence
                .iter()
                .filter_map(|e| match e {
                    crate::prodsig::Evidence::OmittedNonterminal(n) => Some(renamed(n)),
                    _ => None,
                })
                .collect();
            loop {
                let p = r.g.productions[i].clone();
                let Ok(els) = elements(&p.rhs) else { break };
                let Some(pos) = els.iter().position(|(n, _)| omitted.contains(n)) else {
                    break;
                };
                r.apply(Step::Project {
                    production: p,
                    positions: vec![pos],
                })?;
            }
        }
        pairs.push((i, q.clone()));
    }
    let matched_lhs: BTreeSet<String> = pairs
        .iter()
        .map(|(i, _)| r.g.productions[*i].lhs.clone())
        .collect();
    loop {
        let usage = r.g.usage();
        let victim = r.g.nonterminals().into_iter().find(|n| {
            usage.defined.contains(n)
                && !matched_lhs.contains(n)
                && !usage.used.contains(n)
                && !r.g.is_root(n)
        });
        let Some(nt) = victim else { break };
        let before = r.g.productions.clone();
        r.apply(Step::Eliminate { nt, saved: None })?;
        // Keep the index correspondence for the remaining productions.
        let remap: Vec<usize> = before
            .iter()
            .enumerate()
            .scan(0usize, |next, (_, p)| {
                let here = *next;
                if r.g.productions.get(here) == Some(p) {
                    *next += 1;
                }
                Some(here)
            })
            .collect();
        for (i, _) in pairs.iter_mut() {
            *i = remap[*i];
        }
    }
    for (i, q) in &pairs {
        let i = *i;
        let p = r.g.productions[i].clone();
        let (Ok(ep), Ok(eq)) = (elements(&p.rhs), elements(&q.rhs)) else {
            continue;
        };
        let mut used = vec![false; ep.len()];
        let mut counterpart = vec![None; ep.len()];
        for (b, mb) in &eq {
            let pick = (0..ep.len())
                .filter(|&k| !used[k] && ep[k].0 == *b && ep[k].1.compatible(*mb))
                .min_by_key(|&k| ep[k].1 != *mb);
            if let Some(k) = pick {
                used[k] = true;
                counterpart[k] = Some(*mb);
            }
        }
        for (k, (n, mp)) in ep.iter().enumerate() {
            let Some(mq) = counterpart[k] else { continue };
            if *mp == mq {
                continue;
            }
            let x = Expression::nt(n.clone());
            let (from, to) = match (mp, mq) {
                (Mult::Star, Mult::Plus) => (Expression::star(x.clone()), Expression::plus(x)),
                (Mult::Opt, Mult::One) => (Expression::opt(x.clone()), x),
                _ => continue,
            };
            let current = r.g.productions[i].clone();
            let path = if ep.len() == 1 { vec![] } else { vec![k] };
            r.apply(Step::Narrow {
                scope: current.lhs.clone(),
                from,
                to,
                at: Some(Location {
                    production: current,
                    path,
                }),
            })?;
        }
        let current = r.g.productions[i].clone();
        if current.rhs != q.rhs {
            if let (Expression::Sequence(_), Expression::Sequence(_)) = (&current.rhs, &q.rhs) {
                r.apply(Step::Permute {
                    production: current,
                    to: q.rhs.clone(),
                })?;
            }
        }
    }
    Ok((r.g, r.steps))
}

pub fn converge(servant: &Grammar, master: &Grammar) -> Result<ConvergenceResult, ConvergeError> {
    if !is_anf(master) {
        let p = master
            .productions
            .iter()
            .find(|p| p.is_labeled() || !crate::anf::is_anf_rhs(&p.rhs))
            .map(|p| p.to_string())
            .unwrap_or_default();
        return Err(ConvergeError::MasterNotAnf(p));
    }
    let (mutated, mutations) = trigger_mutations(servant).map_err(ConvergeError::Mutation)?;
    let anf = normalize(&mutated)?;
    let matching = match_grammars(&anf.grammar, master)?;
    let (renamed, renames, names) =
        nominal_resolution(&anf.grammar, &matching.mapping).map_err(ConvergeError::Nominal)?;
    let (final_grammar, structural) = structural_resolution(&renamed, master, &matching, &names)
        .map_err(ConvergeError::Structural)?;
    Ok(ConvergenceResult {
        source: servant.clone(),
        mutations,
        normalization: anf.trace,
        anf: anf.grammar,
        matching,
        renames,
        structural,
        final_grammar,
    })
}

pub fn verify(result: &ConvergenceResult, master: &Grammar) -> bool {
    canonical_eq(&result.final_grammar, master)
}
