//! Repairs and optimal repairs.
//!
//! A repair is a maximal consistent subset of the facts. Given the priority
//! relation, a repair is Pareto-optimal if no consistent set improves it by a
//! single preferred fact, globally optimal if no consistent set improves it
//! by a set of facts each removed fact being beaten by some added one, and
//! completion-optimal if it is globally optimal for some total extension of
//! the priority. The search procedures here are the production path; the
//! [`oracle`] module recomputes everything from the definitions.

mod completion;
mod improvement;
pub mod oracle;
mod repairs;

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{compute_attacks, AttackRelation};
use crate::factset::FactSet;
use crate::model::PrioritizedInstance;

pub use completion::{find_completion, Completion};
pub use improvement::{find_global_improvement, find_pareto_improvement};
pub use repairs::{enumerate_repairs, for_each_repair, REPAIR_ENUMERATION_WARN_FACTS};

/// Which notion of optimal repair a semantics is based on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RepairKind {
    /// Subset repairs, ignoring priority.
    S,
    /// Pareto-optimal repairs.
    P,
    /// Globally optimal repairs.
    G,
    /// Completion-optimal repairs.
    C,
}

impl RepairKind {
    pub const ALL: [RepairKind; 4] = [RepairKind::S, RepairKind::P, RepairKind::G, RepairKind::C];
    /// The kinds that take the priority into account.
    pub const PRIORITIZED: [RepairKind; 3] = [RepairKind::P, RepairKind::G, RepairKind::C];
}

impl fmt::Display for RepairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepairKind::S => "S",
            RepairKind::P => "P",
            RepairKind::G => "G",
            RepairKind::C => "C",
        })
    }
}

impl FromStr for RepairKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "s" | "S" => Ok(RepairKind::S),
            "p" | "P" => Ok(RepairKind::P),
            "g" | "G" => Ok(RepairKind::G),
            "c" | "C" => Ok(RepairKind::C),
            _ => Err(format!("unknown repair kind {s:?}")),
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum OptimalityError {
    #[error("search budget of {0} nodes exceeded")]
    SearchBudgetExceeded(u64),
    #[error("instance too large for the exhaustive oracle: {what} is {size}, limit {limit}")]
    OracleTooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
}

/// Default node limit for a single decision.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// A node counter shared by the searches of one decision.
#[derive(Debug)]
pub struct Budget {
    limit: u64,
    used: Cell<u64>,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Self {
            limit,
            used: Cell::new(0),
        }
    }

    pub fn unlimited() -> Self {
        Self::new(u64::MAX)
    }

    /// Counts one search node.
    #[inline]
    pub fn tick(&self) -> Result<(), OptimalityError> {
        let used = self.used.get() + 1;
        self.used.set(used);
        if used > self.limit {
            Err(OptimalityError::SearchBudgetExceeded(self.limit))
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used.get()
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::new(DEFAULT_BUDGET)
    }
}

/// True iff no conflict is a subset of `set`.
pub fn is_consistent(instance: &PrioritizedInstance, set: &FactSet) -> bool {
    instance.is_consistent(set)
}

/// True iff `set` is consistent and no fact outside it can be added.
pub fn is_repair(instance: &PrioritizedInstance, set: &FactSet) -> bool {
    instance.is_consistent(set)
        && instance.facts().filter(|&f| !set.contains(f)).all(|alpha| {
            instance.conflicts_of(alpha).iter().any(|&c| {
                instance
                    .conflict(c as usize)
                    .members
                    .iter()
                    .all(|&m| m == alpha || set.contains(m))
            })
        })
}

/// Production optimality test with a precomputed attack relation.
pub fn is_optimal_with(
    instance: &PrioritizedInstance,
    attacks: &AttackRelation,
    set: &FactSet,
    kind: RepairKind,
    budget: &Budget,
) -> Result<bool, OptimalityError> {
    if !is_repair(instance, set) {
        return Ok(false);
    }
    Ok(match kind {
        RepairKind::S => true,
        RepairKind::P => find_pareto_improvement(instance, attacks, set).is_none(),
        RepairKind::G => find_global_improvement(instance, set, budget)?.is_none(),
        RepairKind::C => find_completion(instance, attacks, set, budget)?.is_some(),
    })
}

/// True iff `set` is a `kind`-optimal repair.
pub fn is_optimal(instance: &PrioritizedInstance, set: &FactSet, kind: RepairKind) -> Result<bool, OptimalityError> {
    let attacks = compute_attacks(instance);
    is_optimal_with(instance, &attacks, set, kind, &Budget::default())
}

/// All `kind`-optimal repairs, by enumerating repairs and filtering.
pub fn optimal_repairs(
    instance: &PrioritizedInstance,
    kind: RepairKind,
    budget: &Budget,
) -> Result<Vec<FactSet>, OptimalityError> {
    let attacks = compute_attacks(instance);
    let mut out = Vec::new();
    for r in enumerate_repairs(instance, budget)? {
        if is_optimal_with(instance, &attacks, &r, kind, budget)? {
            out.push(r);
        }
    }
    Ok(out)
}
