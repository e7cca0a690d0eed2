//! Bidirectional grammar transformation steps and scripts.

mod apply;
mod step;
mod text;

use thiserror::Error;

use crate::bgf::Grammar;

pub use apply::{abstracted, absorb_epsilon, anonymized, apply_step, assoc_image};
pub use step::{invert_step, Location, MissingPayload, Rewrite, Scope, Step, StepKind};
pub use text::{parse_script, parse_step, render_step, serialize_script};

/// An ordered list of steps.
pub type Script = Vec<Step>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum XbgfError {
    #[error("target not found: {0}")]
    TargetNotFound(String),
    #[error("ambiguous target: {0}")]
    AmbiguousTarget(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("name clash: {0}")]
    NameClash(String),
    #[error(transparent)]
    MissingPayload(#[from] MissingPayload),
}

/// Failure of one step inside a script, with the grammar it was applied to.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("step {index} `{step}` failed: {source}")]
pub struct ScriptError {
    pub index: usize,
    pub step: String,
    pub grammar: Box<Grammar>,
    pub source: XbgfError,
}

/// Left fold of [`apply_step`]; returns the result and the completed steps.
pub fn apply_script(g: &Grammar, script: &[Step]) -> Result<(Grammar, Script), ScriptError> {
    let mut current = g.clone();
    let mut done = Vec::with_capacity(script.len());
    for (index, s) in script.iter().enumerate() {
        match apply_step(&current, s) {
            Ok((next, completed)) => {
                current = next;
                done.push(completed);
            }
            Err(source) => {
                return Err(ScriptError {
                    index,
                    step: render_step(s),
                    grammar: Box::new(current),
                    source,
                })
            }
        }
    }
    Ok((current, done))
}

/// The reversed script of inverted steps.
pub fn invert_script(script: &[Step]) -> Result<Script, MissingPayload> {
    script.iter().rev().map(invert_step).collect()
}
