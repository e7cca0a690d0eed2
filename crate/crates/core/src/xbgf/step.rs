use crate::bgf::{Expression, Production};

/// A production rewritten by a step, kept so the step can be undone exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rewrite {
    pub before: Production,
    pub after: Production,
}

impl Rewrite {
    pub fn swapped(&self) -> Rewrite {
        Rewrite {
            before: self.after.clone(),
            after: self.before.clone(),
        }
    }
}

/// A node inside a production: the production itself and the child path
/// from its rhs root.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Location {
    pub production: Production,
    pub path: Vec<usize>,
}

impl Location {
    /// The same node after replacing it with `with`.
    pub fn replaced(&self, with: &Expression) -> Location {
        let mut production = self.production.clone();
        if let Some(node) = production.rhs.at_path_mut(&self.path) {
            *node = with.clone();
        }
        Location {
            production,
            path: self.path.clone(),
        }
    }
}

/// Where `extract` looks for occurrences of the extracted expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scope {
    Global,
    In(String),
}

/// One bidirectional operator application. Optional fields are inversion
/// payloads: they may be omitted in hand-written scripts and are always
/// filled in by [`crate::xbgf::apply_step`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Step {
    RenameN {
        from: String,
        to: String,
    },
    Reroot {
        from: Vec<String>,
        to: Vec<String>,
    },
    /// Removes the label of the given (labeled) production.
    Unlabel {
        production: Production,
    },
    /// Gives the unlabeled version of `production` its label.
    Designate {
        production: Production,
    },
    /// Strips all selectors from the given production.
    Anonymize {
        production: Production,
    },
    /// Restores `production` from its selector-free image.
    Deanonymize {
        production: Production,
    },
    Abstractize {
        production: Production,
    },
    Concretize {
        production: Production,
    },
    /// Splits every top-level choice of `nt` into separate productions.
    /// `saved` holds the definitions of `nt` before the split.
    Vertical {
        nt: String,
        saved: Option<Vec<Production>>,
    },
    /// Merges productions of `nt` into choices so that its definitions
    /// become `into`; without `into` all of them merge into one choice.
    Horizontal {
        nt: String,
        into: Option<Vec<Production>>,
    },
    Undefine {
        nt: String,
        saved: Option<Vec<Production>>,
    },
    Define {
        productions: Vec<Production>,
    },
    /// `chain` is `X → Y`; Y's sole definition moves onto X, labeled `Y`.
    Unchain {
        chain: Production,
        definition: Option<Production>,
    },
    Chain {
        chain: Production,
        definition: Production,
    },
    Abridge {
        production: Production,
    },
    Detour {
        production: Production,
    },
    Extract {
        production: Production,
        scope: Scope,
        rewrites: Option<Vec<Rewrite>>,
    },
    Inline {
        nt: String,
        saved: Option<(Production, Vec<Rewrite>)>,
    },
    /// Removes the sequence elements at `positions` (0-based) from `production`.
    Project {
        production: Production,
        positions: Vec<usize>,
    },
    /// Restores `production` from its projection at `positions`.
    Inject {
        production: Production,
        positions: Vec<usize>,
    },
    Narrow {
        scope: String,
        from: Expression,
        to: Expression,
        at: Option<Location>,
    },
    Widen {
        scope: String,
        from: Expression,
        to: Expression,
        at: Option<Location>,
    },
    /// Reorders the sequence of `production` into `to`.
    Permute {
        production: Production,
        to: Expression,
    },
    Eliminate {
        nt: String,
        saved: Option<Vec<Production>>,
    },
    Introduce {
        productions: Vec<Production>,
    },
    /// Merges `from` into `into`: definitions and uses of `from` move to `into`.
    Unite {
        from: String,
        into: String,
        rewrites: Option<Vec<Rewrite>>,
    },
    SplitN {
        from: String,
        into: String,
        rewrites: Vec<Rewrite>,
    },
    /// `production` is in iteration form; it becomes `seq([X, O, X])`.
    Assoc {
        production: Production,
    },
    Iterate {
        production: Production,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StepKind {
    RenameN,
    Reroot,
    Unlabel,
    Designate,
    Anonymize,
    Deanonymize,
    Abstractize,
    Concretize,
    Vertical,
    Horizontal,
    Undefine,
    Define,
    Unchain,
    Chain,
    Abridge,
    Detour,
    Extract,
    Inline,
    Project,
    Inject,
    Narrow,
    Widen,
    Permute,
    Eliminate,
    Introduce,
    Unite,
    SplitN,
    Assoc,
    Iterate,
}

impl StepKind {
    pub const ALL: [StepKind; 29] = [
        StepKind::RenameN,
        StepKind::Reroot,
        StepKind::Unlabel,
        StepKind::Designate,
        StepKind::Anonymize,
        StepKind::Deanonymize,
        StepKind::Abstractize,
        StepKind::Concretize,
        StepKind::Vertical,
        StepKind::Horizontal,
        StepKind::Undefine,
        StepKind::Define,
        StepKind::Unchain,
        StepKind::Chain,
        StepKind::Abridge,
        StepKind::Detour,
        StepKind::Extract,
        StepKind::Inline,
        StepKind::Project,
        StepKind::Inject,
        StepKind::Narrow,
        StepKind::Widen,
        StepKind::Permute,
        StepKind::Eliminate,
        StepKind::Introduce,
        StepKind::Unite,
        StepKind::SplitN,
        StepKind::Assoc,
        StepKind::Iterate,
    ];

    /// Operator name in scripts.
    pub fn name(self) -> &'static str {
        match self {
            StepKind::RenameN => "renameN",
            StepKind::Reroot => "reroot",
            StepKind::Unlabel => "unlabel",
            StepKind::Designate => "designate",
            StepKind::Anonymize => "anonymize",
            StepKind::Deanonymize => "deanonymize",
            StepKind::Abstractize => "abstractize",
            StepKind::Concretize => "concretize",
            StepKind::Vertical => "vertical",
            StepKind::Horizontal => "horizontal",
            StepKind::Undefine => "undefine",
            StepKind::Define => "define",
            StepKind::Unchain => "unchain",
            StepKind::Chain => "chain",
            StepKind::Abridge => "abridge",
            StepKind::Detour => "detour",
            StepKind::Extract => "extract",
            StepKind::Inline => "inline",
            StepKind::Project => "project",
            StepKind::Inject => "inject",
            StepKind::Narrow => "narrow",
            StepKind::Widen => "widen",
            StepKind::Permute => "permute",
            StepKind::Eliminate => "eliminate",
            StepKind::Introduce => "introduce",
            StepKind::Unite => "unite",
            StepKind::SplitN => "splitN",
            StepKind::Assoc => "assoc",
            StepKind::Iterate => "iterate",
        }
    }

    pub fn from_name(name: &str) -> Option<StepKind> {
        StepKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn inverse(self) -> StepKind {
        use StepKind::*;
        match self {
            RenameN => RenameN,
            Reroot => Reroot,
            Permute => Permute,
            Unlabel => Designate,
            Designate => Unlabel,
            Anonymize => Deanonymize,
            Deanonymize => Anonymize,
            Abstractize => Concretize,
            Concretize => Abstractize,
            Vertical => Horizontal,
            Horizontal => Vertical,
            Undefine => Define,
            Define => Undefine,
            Unchain => Chain,
            Chain => Unchain,
            Abridge => Detour,
            Detour => Abridge,
            Extract => Inline,
            Inline => Extract,
            Project => Inject,
            Inject => Project,
            Narrow => Widen,
            Widen => Narrow,
            Eliminate => Introduce,
            Introduce => Eliminate,
            Unite => SplitN,
            SplitN => Unite,
            Assoc => Iterate,
            Iterate => Assoc,
        }
    }

    /// The bidirectional pair name, e.g. `unchain-chain`.
    pub fn pair_name(self) -> String {
        format!("{}-{}", self.name(), self.inverse().name())
    }
}

impl Step {
    pub fn kind(&self) -> StepKind {
        match self {
            Step::RenameN { .. } => StepKind::RenameN,
            Step::Reroot { .. } => StepKind::Reroot,
            Step::Unlabel { .. } => StepKind::Unlabel,
            Step::Designate { .. } => StepKind::Designate,
            Step::Anonymize { .. } => StepKind::Anonymize,
            Step::Deanonymize { .. } => StepKind::Deanonymize,
            Step::Abstractize { .. } => StepKind::Abstractize,
            Step::Concretize { .. } => StepKind::Concretize,
            Step::Vertical { .. } => StepKind::Vertical,
            Step::Horizontal { .. } => StepKind::Horizontal,
            Step::Undefine { .. } => StepKind::Undefine,
            Step::Define { .. } => StepKind::Define,
            Step::Unchain { .. } => StepKind::Unchain,
            Step::Chain { .. } => StepKind::Chain,
            Step::Abridge { .. } => StepKind::Abridge,
            Step::Detour { .. } => StepKind::Detour,
            Step::Extract { .. } => StepKind::Extract,
            Step::Inline { .. } => StepKind::Inline,
            Step::Project { .. } => StepKind::Project,
            Step::Inject { .. } => StepKind::Inject,
            Step::Narrow { .. } => StepKind::Narrow,
            Step::Widen { .. } => StepKind::Widen,
            Step::Permute { .. } => StepKind::Permute,
            Step::Eliminate { .. } => StepKind::Eliminate,
            Step::Introduce { .. } => StepKind::Introduce,
            Step::Unite { .. } => StepKind::Unite,
            Step::SplitN { .. } => StepKind::SplitN,
            Step::Assoc { .. } => StepKind::Assoc,
            Step::Iterate { .. } => StepKind::Iterate,
        }
    }
}

/// A pure inverse needs the payload a forward application records.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0} step carries no inversion payload")]
pub struct MissingPayload(pub &'static str);

pub fn invert_step(s: &Step) -> Result<Step, MissingPayload> {
    let missing = || MissingPayload(s.kind().name());
    Ok(match s {
        Step::RenameN { from, to } => Step::RenameN {
            from: to.clone(),
            to: from.clone(),
        },
        Step::Reroot { from, to } => Step::Reroot {
            from: to.clone(),
            to: from.clone(),
        },
        Step::Unlabel { production } => Step::Designate {
            production: production.clone(),
        },
        Step::Designate { production } => Step::Unlabel {
            production: production.clone(),
        },
        Step::Anonymize { production } => Step::Deanonymize {
            production: production.clone(),
        },
        Step::Deanonymize { production } => Step::Anonymize {
            production: production.clone(),
        },
        Step::Abstractize { production } => Step::Concretize {
            production: production.clone(),
        },
        Step::Concretize { production } => Step::Abstractize {
            production: production.clone(),
        },
        Step::Vertical { nt, saved } => Step::Horizontal {
            nt: nt.clone(),
            into: Some(saved.clone().ok_or_else(missing)?),
        },
        Step::Horizontal { nt, into } => Step::Vertical {
            nt: nt.clone(),
            saved: Some(into.clone().ok_or_else(missing)?),
        },
        Step::Undefine { saved, .. } => Step::Define {
            productions: saved.clone().ok_or_else(missing)?,
        },
        Step::Define { productions } => Step::Undefine {
            nt: productions.first().ok_or_else(missing)?.lhs.clone(),
            saved: Some(productions.clone()),
        },
        Step::Unchain { chain, definition } => Step::Chain {
            chain: chain.clone(),
            definition: definition.clone().ok_or_else(missing)?,
        },
        Step::Chain { chain, definition } => Step::Unchain {
            chain: chain.clone(),
            definition: Some(definition.clone()),
        },
        Step::Abridge { production } => Step::Detour {
            production: production.clone(),
        },
        Step::Detour { production } => Step::Abridge {
            production: production.clone(),
        },
        Step::Extract {
            production,
            rewrites,
            ..
        } => Step::Inline {
            nt: production.lhs.clone(),
            saved: Some((
                production.clone(),
                rewrites
                    .as_ref()
                    .ok_or_else(missing)?
                    .iter()
                    .map(Rewrite::swapped)
                    .collect(),
            )),
        },
        Step::Inline { saved, .. } => {
            let (definition, rewrites) = saved.as_ref().ok_or_else(missing)?;
            Step::Extract {
                production: definition.clone(),
                scope: Scope::Global,
                rewrites: Some(rewrites.iter().map(Rewrite::swapped).collect()),
            }
        }
        Step::Project {
            production,
            positions,
        } => Step::Inject {
            production: production.clone(),
            positions: positions.clone(),
        },
        Step::Inject {
            production,
            positions,
        } => Step::Project {
            production: production.clone(),
            positions: positions.clone(),
        },
        Step::Narrow {
            scope,
            from,
            to,
            at,
        } => Step::Widen {
            scope: scope.clone(),
            from: to.clone(),
            to: from.clone(),
            at: Some(at.as_ref().ok_or_else(missing)?.replaced(to)),
        },
        Step::Widen {
            scope,
            from,
            to,
            at,
        } => Step::Narrow {
            scope: scope.clone(),
            from: to.clone(),
            to: from.clone(),
            at: Some(at.as_ref().ok_or_else(missing)?.replaced(to)),
        },
        Step::Permute { production, to } => Step::Permute {
            production: Production::new(production.label.clone(), production.lhs.clone(), to.clone()),
            to: production.rhs.clone(),
        },
        Step::Eliminate { saved, .. } => Step::Introduce {
            productions: saved.clone().ok_or_else(missing)?,
        },
        Step::Introduce { productions } => Step::Eliminate {
            nt: productions.first().ok_or_else(missing)?.lhs.clone(),
            saved: Some(productions.clone()),
        },
        Step::Unite {
            from,
            into,
            rewrites,
        } => Step::SplitN {
            from: from.clone(),
            into: into.clone(),
            rewrites: rewrites
                .as_ref()
                .ok_or_else(missing)?
                .iter()
                .map(Rewrite::swapped)
                .collect(),
        },
        Step::SplitN {
            from,
            into,
            rewrites,
        } => Step::Unite {
            from: from.clone(),
            into: into.clone(),
            rewrites: Some(rewrites.iter().map(Rewrite::swapped).collect()),
        },
        Step::Assoc { production } => Step::Iterate {
            production: production.clone(),
        },
        Step::Iterate { production } => Step::Assoc {
            production: production.clone(),
        },
    })
}
