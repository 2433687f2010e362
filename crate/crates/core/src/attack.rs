//! The attack relation, the characteristic function Γ and the grounded repair.
//!
//! For a conflict `C` and `α ∈ C`, the set `C∖{α}` attacks `α` unless α is
//! preferred to some other member of `C`. Γ(B) keeps the facts all of whose
//! attackers are counter-attacked from inside B; its least fixpoint is the
//! grounded repair.

use serde::Serialize;

use crate::factset::{FactId, FactSet};
use crate::model::{ModelError, PrioritizedInstance};

/// One hyperedge `attackers ↝ target`, generated by `conflict`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Attack<'a> {
    pub target: FactId,
    pub conflict: u32,
    pub attackers: &'a [FactId],
}

/// All attacks of an instance, stored flat, with indices by target and by attacker.
#[derive(Clone, Debug, Default)]
pub struct AttackRelation {
    targets: Vec<FactId>,
    conflicts: Vec<u32>,
    offsets: Vec<u32>,
    attackers: Vec<FactId>,
    by_target: Vec<Vec<u32>>,
    by_attacker: Vec<Vec<u32>>,
}

impl AttackRelation {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn get(&self, index: usize) -> Attack<'_> {
        Attack {
            target: self.targets[index],
            conflict: self.conflicts[index],
            attackers: &self.attackers[self.offsets[index] as usize..self.offsets[index + 1] as usize],
        }
    }

    /// Attacks in conflict order, then by target id.
    pub fn iter(&self) -> impl Iterator<Item = Attack<'_>> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }

    /// Indices of the attacks on `fact`.
    pub fn on(&self, fact: FactId) -> &[u32] {
        self.by_target.get(fact.index()).map_or(&[], Vec::as_slice)
    }

    /// Indices of the attacks whose attacker set contains `fact`.
    pub fn by(&self, fact: FactId) -> &[u32] {
        self.by_attacker.get(fact.index()).map_or(&[], Vec::as_slice)
    }

    pub fn attacks_on(&self, fact: FactId) -> impl Iterator<Item = Attack<'_>> + '_ {
        self.on(fact).iter().map(|&i| self.get(i as usize))
    }

    pub fn is_attacked(&self, fact: FactId) -> bool {
        !self.on(fact).is_empty()
    }

    /// True iff some attacker set of `fact` lies inside `set`.
    pub fn attacked_from(&self, fact: FactId, set: &FactSet) -> bool {
        self.attacks_on(fact)
            .any(|a| a.attackers.iter().all(|&b| set.contains(b)))
    }
}

/// Builds the attack relation, ordered by conflict then target.
pub fn compute_attacks(instance: &PrioritizedInstance) -> AttackRelation {
    let n = instance.num_facts();
    let mut rel = AttackRelation {
        offsets: vec![0],
        by_target: vec![Vec::new(); n],
        by_attacker: vec![Vec::new(); n],
        ..Default::default()
    };
    for (ci, conflict) in instance.conflicts().iter().enumerate() {
        for &alpha in &conflict.members {
            if conflict
                .members
                .iter()
                .any(|&beta| instance.prefers(alpha, beta))
            {
                continue;
            }
            let index = rel.targets.len() as u32;
            rel.targets.push(alpha);
            rel.conflicts.push(ci as u32);
            for &beta in conflict.members.iter().filter(|&&b| b != alpha) {
                rel.attackers.push(beta);
                rel.by_attacker[beta.index()].push(index);
            }
            rel.offsets.push(rel.attackers.len() as u32);
            rel.by_target[alpha.index()].push(index);
        }
    }
    rel
}

/// Γ(B): the facts each of whose attacker sets contains a fact attacked from inside `b`.
pub fn gamma(instance: &PrioritizedInstance, attacks: &AttackRelation, b: &FactSet) -> FactSet {
    let defeated: Vec<bool> = instance
        .facts()
        .map(|f| attacks.attacked_from(f, b))
        .collect();
    instance
        .facts()
        .filter(|&alpha| {
            attacks
                .attacks_on(alpha)
                .all(|a| a.attackers.iter().any(|&beta| defeated[beta.index()]))
        })
        .collect()
}

/// Γ(∅), which is exactly the set of unattacked facts.
pub fn trivially_piar(instance: &PrioritizedInstance, attacks: &AttackRelation) -> FactSet {
    gamma(instance, attacks, &FactSet::new())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroundedResult {
    pub grounded: FactSet,
    /// Conflicting facts added by each application of Γ, starting from Γ(∅).
    pub steps: Vec<FactSet>,
}

impl GroundedResult {
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Γ(∅), the trivially P-IAR facts.
    pub fn gamma_empty(&self, instance: &PrioritizedInstance) -> FactSet {
        let mut out = instance.unconflicted();
        if let Some(first) = self.steps.first() {
            out.union_with(first);
        }
        out
    }
}

/// Iterates Γ from ∅ to its least fixpoint, maintaining per-attack counters
/// so that each attack is touched a bounded number of times overall.
pub fn grounded_repair(
    instance: &PrioritizedInstance,
    attacks: &AttackRelation,
) -> Result<GroundedResult, ModelError> {
    let n = instance.num_facts();
    let m = attacks.len();
    let mut missing: Vec<u32> = (0..m).map(|i| attacks.get(i).attackers.len() as u32).collect();
    let mut defeated = vec![false; n];
    let mut countered = vec![false; m];
    let mut uncountered: Vec<u32> = (0..n).map(|f| attacks.on(FactId::from(f)).len() as u32).collect();
    let mut ready: Vec<FactId> = Vec::new();

    fn defeat(
        target: FactId,
        attacks: &AttackRelation,
        defeated: &mut [bool],
        countered: &mut [bool],
        uncountered: &mut [u32],
        ready: &mut Vec<FactId>,
    ) {
        if std::mem::replace(&mut defeated[target.index()], true) {
            return;
        }
        for &a in attacks.by(target) {
            let a = a as usize;
            if !std::mem::replace(&mut countered[a], true) {
                let t = attacks.get(a).target;
                uncountered[t.index()] -= 1;
                if uncountered[t.index()] == 0 {
                    ready.push(t);
                }
            }
        }
    }

    for f in 0..n {
        if uncountered[f] == 0 {
            ready.push(FactId::from(f));
        }
    }
    for a in 0..m {
        if missing[a] == 0 {
            let t = attacks.get(a).target;
            defeat(t, attacks, &mut defeated, &mut countered, &mut uncountered, &mut ready);
        }
    }

    let conflicting = instance.conflicting();
    let mut grounded = FactSet::with_capacity(n);
    let mut steps = Vec::new();
    loop {
        let batch = std::mem::take(&mut ready);
        let mut delta = FactSet::new();
        for &f in &batch {
            if grounded.insert(f) && conflicting.contains(f) {
                delta.insert(f);
            }
        }
        if !steps.is_empty() && delta.is_empty() {
            break;
        }
        steps.push(delta);
        for f in batch {
            for &a in attacks.by(f) {
                let a = a as usize;
                missing[a] -= 1;
                if missing[a] == 0 {
                    let t = attacks.get(a).target;
                    defeat(t, attacks, &mut defeated, &mut countered, &mut uncountered, &mut ready);
                }
            }
        }
        if ready.is_empty() {
            break;
        }
    }

    if let Some(c) = instance.conflicts().iter().find(|c| c.is_subset_of(&grounded)) {
        return Err(ModelError::InternalInconsistency(c.label.clone()));
    }
    Ok(GroundedResult { grounded, steps })
}
