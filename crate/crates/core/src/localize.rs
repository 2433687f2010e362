//! Hypergraph reachability from the causes of an answer.
//!
//! Each conflict `C` and member `α` give a hyperedge from `α` to `C∖{α}`.
//! Strong reachability follows it when α is preferred to no other member of
//! `C` (that is, when `C∖{α}` attacks α); weak reachability follows it when α
//! is not preferred to at least one other member. Deciding an answer on the
//! sub-instance induced by the weakly reachable facts gives the same verdict
//! as on the full instance for P, G and C; strong reachability only keeps
//! that guarantee for P. A completion of the local priority can orient a pair
//! against a cycle that closes through unreached facts.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::factset::{FactId, FactSet};
use crate::model::{restrict, AnswerCauses, PrioritizedInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReachMode {
    Strong,
    Weak,
    /// Reachability in the oriented conflict graph; binary instances only.
    BinaryGraph,
}

impl fmt::Display for ReachMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReachMode::Strong => "strong",
            ReachMode::Weak => "weak",
            ReachMode::BinaryGraph => "binary",
        })
    }
}

impl FromStr for ReachMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "strong" => Ok(ReachMode::Strong),
            "weak" => Ok(ReachMode::Weak),
            "binary" | "bin" => Ok(ReachMode::BinaryGraph),
            _ => Err(format!("unknown reach mode {s:?} (expected strong, weak or binary)")),
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LocalizeError {
    #[error("reach mode {mode} cannot be used here: {reason}")]
    ModeMismatch { mode: ReachMode, reason: &'static str },
}

/// The facts reachable from `seed`; always a superset of `seed`.
pub fn reach(instance: &PrioritizedInstance, seed: &FactSet, mode: ReachMode) -> Result<FactSet, LocalizeError> {
    if mode == ReachMode::BinaryGraph && !instance.is_binary() {
        return Err(LocalizeError::ModeMismatch {
            mode,
            reason: "the instance has non-binary conflicts",
        });
    }
    Ok(closure(instance, seed, |alpha, members| match mode {
        ReachMode::Strong => !members.iter().any(|&b| instance.prefers(alpha, b)),
        ReachMode::Weak => members.iter().any(|&b| b != alpha && !instance.prefers(alpha, b)),
        ReachMode::BinaryGraph => {
            let beta = if members[0] == alpha { members[1] } else { members[0] };
            !instance.prefers(alpha, beta)
        }
    }))
}

/// Union of the conflict-graph components touching `seed`, ignoring priority.
///
/// Subset repairs of an instance are the products of the repairs of its
/// components, so this is the localization used for subset-repair semantics.
pub fn reach_components(instance: &PrioritizedInstance, seed: &FactSet) -> FactSet {
    closure(instance, seed, |_, _| true)
}

fn closure(
    instance: &PrioritizedInstance,
    seed: &FactSet,
    follow: impl Fn(FactId, &[FactId]) -> bool,
) -> FactSet {
    let mut reached = seed.clone();
    let mut expanded = vec![false; instance.conflicts().len()];
    let mut stack: Vec<FactId> = seed.iter().filter(|f| f.index() < instance.num_facts()).collect();
    while let Some(alpha) = stack.pop() {
        for &ci in instance.conflicts_of(alpha) {
            if expanded[ci as usize] {
                continue;
            }
            let members = &instance.conflict(ci as usize).members;
            if follow(alpha, members) {
                expanded[ci as usize] = true;
                for &beta in members {
                    if reached.insert(beta) {
                        stack.push(beta);
                    }
                }
            }
        }
    }
    reached
}

/// Restricts `instance` to what is reachable from the causes of `answer`.
///
/// Returns the sub-instance and the answer translated onto it.
pub fn localized_instance(
    instance: &PrioritizedInstance,
    answer: &AnswerCauses,
    mode: ReachMode,
) -> Result<(PrioritizedInstance, AnswerCauses), LocalizeError> {
    let keep = reach(instance, &answer.cause_union(), mode)?;
    Ok(restrict_for(instance, answer, &keep))
}

pub(crate) fn restrict_for(
    instance: &PrioritizedInstance,
    answer: &AnswerCauses,
    keep: &FactSet,
) -> (PrioritizedInstance, AnswerCauses) {
    let sub = restrict(instance, keep);
    let translated = instance.translate_answer(answer, &sub);
    (sub, translated)
}
