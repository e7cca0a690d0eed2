//! Normalization to Abstract Normal Form (ANF): no terminals, selectors,
//! labels, choices, ε or φ; every rhs is a chain, an iterated nonterminal or
//! a flat sequence of (possibly iterated) nonterminals.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::bgf::{Expression, Grammar, Production};
use crate::xbgf::{apply_step, Scope, Script, Step, XbgfError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnfGrammar {
    pub grammar: Grammar,
    pub trace: Script,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnfError {
    #[error("normalization diverged: step budget of {0} exceeded")]
    NormalizationDiverged(usize),
    #[error("cannot normalize: {0}")]
    NotNormalizable(String),
    #[error("normalization step failed: {0}")]
    Step(#[from] XbgfError),
}

/// A nonterminal or an iterated nonterminal.
fn is_anf_atom(e: &Expression) -> bool {
    match e {
        Expression::Nonterminal(_) => true,
        Expression::Star(x) | Expression::Plus(x) | Expression::Optional(x) => {
            matches!(x.as_ref(), Expression::Nonterminal(_))
        }
        _ => false,
    }
}

pub fn is_anf_rhs(e: &Expression) -> bool {
    match e {
        Expression::Sequence(xs) => xs.iter().all(is_anf_atom),
        other => is_anf_atom(other),
    }
}

pub fn is_anf(g: &Grammar) -> bool {
    g.productions
        .iter()
        .all(|p| !p.is_labeled() && is_anf_rhs(&p.rhs))
}

/// Top nonterminals (defined, never used) in first-definition order,
/// skipping those whose definitions refer to no defined nonterminal; if
/// that leaves nothing, all top nonterminals; if there are none, the
/// current roots.
pub fn detect_roots(g: &Grammar) -> Vec<String> {
    let usage = g.usage();
    let mut top = Vec::new();
    for p in &g.productions {
        if usage.top.contains(&p.lhs) && !top.contains(&p.lhs) {
            top.push(p.lhs.clone());
        }
    }
    if top.is_empty() {
        return g.roots.clone();
    }
    let substantial: Vec<String> = top
        .iter()
        .filter(|nt| {
            g.definitions(nt)
                .any(|p| p.rhs.nonterminals().iter().any(|n| usage.defined.contains(*n)))
        })
        .cloned()
        .collect();
    if substantial.is_empty() {
        top
    } else {
        substantial
    }
}

struct Run {
    g: Grammar,
    trace: Script,
    budget: usize,
}

impl Run {
    fn apply(&mut self, s: Step) -> Result<(), AnfError> {
        if self.trace.len() >= self.budget {
            return Err(AnfError::NormalizationDiverged(self.budget));
        }
        let (g, done) = apply_step(&self.g, &s)?;
        self.g = g;
        self.trace.push(done);
        Ok(())
    }

    /// Applies `make` to the first production it accepts, repeatedly.
    fn each_production(
        &mut self,
        mut make: impl FnMut(&Grammar, &Production) -> Result<Option<Step>, AnfError>,
    ) -> Result<bool, AnfError> {
        let mut changed = false;
        loop {
            let mut next = None;
            for p in &self.g.productions {
                if let Some(s) = make(&self.g, p)? {
                    next = Some(s);
                    break;
                }
            }
            match next {
                Some(s) => {
                    self.apply(s)?;
                    changed = true;
                }
                None => return Ok(changed),
            }
        }
    }

    fn defined_in_order(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        self.g
            .productions
            .iter()
            .filter(|p| seen.insert(p.lhs.clone()))
            .map(|p| p.lhs.clone())
            .collect()
    }

    fn unlabel(&mut self) -> Result<bool, AnfError> {
        self.each_production(|_, p| {
            Ok(p.is_labeled().then(|| Step::Unlabel {
                production: p.clone(),
            }))
        })
    }

    fn anonymize(&mut self) -> Result<bool, AnfError> {
        self.each_production(|_, p| {
            Ok(p
                .rhs
                .contains(|e| matches!(e, Expression::Selector(..)))
                .then(|| Step::Anonymize {
                    production: p.clone(),
                }))
        })
    }

    fn abstractize(&mut self) -> Result<bool, AnfError> {
        self.each_production(|_, p| {
            Ok(p
                .rhs
                .contains(|e| matches!(e, Expression::Terminal(_)))
                .then(|| Step::Abstractize {
                    production: p.clone(),
                }))
        })
    }

    fn vertical(&mut self) -> Result<bool, AnfError> {
        let mut changed = false;
        for nt in self.defined_in_order() {
            if self
                .g
                .definitions(&nt)
                .any(|p| matches!(p.rhs, Expression::Choice(_)))
            {
                self.apply(Step::Vertical { nt, saved: None })?;
                changed = true;
            }
        }
        Ok(changed)
    }

    /// Nonterminals defined only by ε/φ: undefined when still needed,
    /// eliminated otherwise.
    fn drop_vacuous(&mut self) -> Result<bool, AnfError> {
        let mut changed = false;
        for nt in self.defined_in_order() {
            let rhss: Vec<&Expression> = self.g.definitions(&nt).map(|p| &p.rhs).collect();
            let count = rhss
                .iter()
                .filter(|e| matches!(e, Expression::Epsilon | Expression::Empty))
                .count();
            if count == 0 {
                continue;
            }
            if count < rhss.len() {
                return Err(AnfError::NotNormalizable(format!(
                    "{nt} mixes empty and non-empty definitions"
                )));
            }
            let used_elsewhere = self
                .g
                .productions
                .iter()
                .any(|p| p.lhs != nt && p.rhs.mentions(&nt));
            let step = if used_elsewhere || self.g.is_root(&nt) {
                Step::Undefine { nt, saved: None }
            } else {
                Step::Eliminate { nt, saved: None }
            };
            self.apply(step)?;
            changed = true;
        }
        Ok(changed)
    }

    fn unchain(&mut self) -> Result<bool, AnfError> {
        self.each_production(|g, p| {
            let Some(y) = p.chain_target() else {
                return Ok(None);
            };
            let eligible = y != p.lhs
                && !g.is_root(y)
                && g.definition_indices(y).len() == 1
                && g.occurrences(y) == 1
                && !g
                    .definitions(&p.lhs)
                    .any(|q| q.label == y);
            Ok(eligible.then(|| Step::Unchain {
                chain: p.clone(),
                definition: None,
            }))
        })
    }

    fn abridge(&mut self) -> Result<bool, AnfError> {
        self.each_production(|_, p| {
            Ok((p.chain_target() == Some(p.lhs.as_str())).then(|| Step::Abridge {
                production: p.clone(),
            }))
        })
    }

    fn inline(&mut self) -> Result<bool, AnfError> {
        self.each_production(|g, p| {
            let eligible = matches!(p.chain_target(), Some(y) if y != p.lhs)
                && g.definition_indices(&p.lhs).len() == 1
                && !g.is_root(&p.lhs)
                && g.is_used(&p.lhs);
            Ok(eligible.then(|| Step::Inline {
                nt: p.lhs.clone(),
                saved: None,
            }))
        })
    }

    /// Composites nested in sequences or iterations get their own names.
    fn extract_nested(&mut self) -> Result<bool, AnfError> {
        self.each_production(|g, p| {
            Ok(nested_composite(&p.rhs).map(|e| Step::Extract {
                production: Production::unlabeled(fresh_name(g, &p.lhs, 1), e),
                scope: Scope::In(p.lhs.clone()),
                rewrites: None,
            }))
        })
    }

    /// Each sequence alternative of a multiply defined nonterminal `X`
    /// becomes `X → X_k`, `X_k → sequence`.
    fn extract_alternatives(&mut self) -> Result<(), AnfError> {
        for nt in self.defined_in_order() {
            if self.g.definition_indices(&nt).len() < 2 {
                continue;
            }
            let mut k = 0;
            loop {
                let Some(p) = self
                    .g
                    .definitions(&nt)
                    .find(|p| matches!(p.rhs, Expression::Sequence(_)))
                    .cloned()
                else {
                    break;
                };
                k += 1;
                let name = fresh_name(&self.g, &nt, k);
                self.apply(Step::Extract {
                    production: Production::unlabeled(name, p.rhs.clone()),
                    scope: Scope::In(nt.clone()),
                    rewrites: None,
                })?;
            }
        }
        Ok(())
    }
}

fn is_composite(e: &Expression) -> bool {
    matches!(
        e,
        Expression::Sequence(_)
            | Expression::Choice(_)
            | Expression::Star(_)
            | Expression::Plus(_)
            | Expression::Optional(_)
    )
}

fn nested_composite(rhs: &Expression) -> Option<Expression> {
    let under_iteration = |e: &Expression| match e {
        Expression::Star(x) | Expression::Plus(x) | Expression::Optional(x) if is_composite(x) => {
            Some(x.as_ref().clone())
        }
        _ => None,
    };
    match rhs {
        Expression::Sequence(xs) => xs.iter().find_map(|x| match x {
            Expression::Sequence(_) | Expression::Choice(_) => Some(x.clone()),
            other => under_iteration(other),
        }),
        other => under_iteration(other),
    }
}

/// `X_k`, or `X_k_j` for the first free `j` when `X_k` is taken.
fn fresh_name(g: &Grammar, parent: &str, k: usize) -> String {
    let mut k = k;
    loop {
        let base = format!("{parent}_{k}");
        if !g.mentions(&base) {
            return base;
        }
        if let Some(name) = (1..=g.productions.len() + 1)
            .map(|j| format!("{base}_{j}"))
            .find(|n| !g.mentions(n))
        {
            return name;
        }
        k += 1;
    }
}

pub fn normalize(g: &Grammar) -> Result<AnfGrammar, AnfError> {
    let mut run = Run {
        g: g.clone(),
        trace: Vec::new(),
        budget: 10 * g.productions.len().max(1),
    };
    let roots = detect_roots(&run.g);
    if roots != run.g.roots && !(is_anf(g) && !g.roots.is_empty()) {
        run.apply(Step::Reroot {
            from: run.g.roots.clone(),
            to: roots,
        })?;
    }
    if is_anf(g) {
        return Ok(AnfGrammar {
            grammar: run.g,
            trace: run.trace,
        });
    }
    loop {
        let mut changed = run.unlabel()?;
        changed |= run.anonymize()?;
        changed |= run.abstractize()?;
        changed |= run.vertical()?;
        changed |= run.drop_vacuous()?;
        changed |= run.unchain()?;
        changed |= run.abridge()?;
        changed |= run.inline()?;
        changed |= run.extract_nested()?;
        if !changed {
            break;
        }
    }
    run.extract_alternatives()?;
    // Removing self-chains can expose top nonterminals the input lacked.
    if run.g.roots.is_empty() {
        let roots = detect_roots(&run.g);
        if !roots.is_empty() {
            run.apply(Step::Reroot {
                from: Vec::new(),
                to: roots,
            })?;
        }
    }
    if let Some(p) = run
        .g
        .productions
        .iter()
        .find(|p| p.is_labeled() || !is_anf_rhs(&p.rhs))
    {
        return Err(AnfError::NotNormalizable(format!("{p} has no ANF shape")));
    }
    Ok(AnfGrammar {
        grammar: run.g,
        trace: run.trace,
    })
}
