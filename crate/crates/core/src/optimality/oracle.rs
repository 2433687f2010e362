//! Exhaustive ground truth for small instances, straight from the definitions.
//!
//! Sets of conflicting facts are bitmasks over a local numbering; facts in no
//! conflict belong to every repair and are added back when converting to
//! [`FactSet`]. Nothing here uses the attack-based shortcuts of the
//! production path, except the grounded semantics, whose definition is
//! itself in terms of attacks.

use crate::factset::{FactId, FactSet};
use crate::model::{AnswerCauses, PrioritizedInstance};

use super::{Budget, OptimalityError, RepairKind};

/// Largest number of conflicting facts the oracle accepts.
pub const ORACLE_MAX_FACTS: usize = 16;

pub struct Oracle<'a> {
    instance: &'a PrioritizedInstance,
    local: Vec<FactId>,
    conflicts: Vec<u32>,
    /// `pref[i]`: the local facts j with i ≻ j.
    pref: Vec<u32>,
    consistent: Vec<u32>,
    repairs: Vec<u32>,
    unconflicted: FactSet,
}

impl<'a> Oracle<'a> {
    pub fn new(instance: &'a PrioritizedInstance) -> Result<Self, OptimalityError> {
        let local: Vec<FactId> = instance.conflicting().iter().collect();
        if local.len() > ORACLE_MAX_FACTS {
            return Err(OptimalityError::OracleTooLarge {
                what: "number of conflicting facts",
                size: local.len(),
                limit: ORACLE_MAX_FACTS,
            });
        }
        let pos = |f: FactId| local.iter().position(|&g| g == f).expect("conflicting fact");
        let conflicts: Vec<u32> = instance
            .conflicts()
            .iter()
            .map(|c| c.members.iter().fold(0u32, |m, &f| m | 1 << pos(f)))
            .collect();
        let mut pref = vec![0u32; local.len()];
        for &(a, b) in instance.prefs() {
            pref[pos(a)] |= 1 << pos(b);
        }
        let n = local.len();
        let consistent: Vec<u32> = (0..1u32 << n)
            .filter(|&s| conflicts.iter().all(|&c| c & !s != 0))
            .collect();
        let is_consistent = |s: u32| conflicts.iter().all(|&c| c & !s != 0);
        let repairs = consistent
            .iter()
            .copied()
            .filter(|&s| (0..n).all(|i| s & (1 << i) != 0 || !is_consistent(s | 1 << i)))
            .collect();
        Ok(Self {
            instance,
            local,
            conflicts,
            pref,
            consistent,
            repairs,
            unconflicted: instance.unconflicted(),
        })
    }

    fn to_set(&self, mask: u32) -> FactSet {
        let mut out = self.unconflicted.clone();
        for (i, &f) in self.local.iter().enumerate() {
            if mask & (1 << i) != 0 {
                out.insert(f);
            }
        }
        out
    }

    fn to_mask(&self, set: &FactSet) -> Option<u32> {
        let mut mask = 0;
        for f in set.iter() {
            match self.local.iter().position(|&g| g == f) {
                Some(i) => mask |= 1 << i,
                None if self.unconflicted.contains(f) => {}
                None => return None,
            }
        }
        Some(mask)
    }

    fn bits(mask: u32) -> impl Iterator<Item = usize> {
        (0..32).filter(move |i| mask & (1 << i) != 0)
    }

    fn prefers(&self, a: usize, b: usize) -> bool {
        self.pref[a] & (1 << b) != 0
    }

    fn co_conflicting(&self, a: usize, b: usize) -> bool {
        a != b && self.conflicts.iter().any(|&c| c & (1 << a) != 0 && c & (1 << b) != 0)
    }

    fn pareto_improved(&self, r: u32) -> bool {
        self.consistent.iter().any(|&b| {
            let added = b & !r;
            let removed = r & !b;
            Self::bits(added).any(|beta| Self::bits(removed).all(|alpha| self.prefers(beta, alpha)))
        })
    }

    fn globally_improved(&self, r: u32) -> bool {
        self.consistent.iter().any(|&b| {
            let added = b & !r;
            let removed = r & !b;
            b != r && Self::bits(removed).all(|alpha| Self::bits(added).any(|beta| self.prefers(beta, alpha)))
        })
    }

    /// Whether some completion makes `r` globally optimal.
    ///
    /// Every consistent `B ≠ r` must fail to improve `r` under the
    /// completion ≻': some α ∈ r∖B must be beaten by no β ∈ B∖r, i.e. α ≻' β
    /// for every co-conflicting such β. The search satisfies these
    /// constraints one at a time by orienting pairs, keeping the base
    /// priority plus the chosen orientations acyclic.
    fn completion_optimal(&self, r: u32, budget: &Budget) -> Result<bool, OptimalityError> {
        let n = self.local.len();
        // Each constraint: the options α, each with the pairs (α, β) it needs.
        let mut constraints: Vec<Vec<Vec<(usize, usize)>>> = Vec::new();
        for &b in &self.consistent {
            if b == r {
                continue;
            }
            let added = b & !r;
            let removed = r & !b;
            if added == 0 {
                continue;
            }
            let options: Vec<Vec<(usize, usize)>> = Self::bits(removed)
                .map(|alpha| {
                    Self::bits(added)
                        .filter(|&beta| self.co_conflicting(alpha, beta))
                        .map(|beta| (alpha, beta))
                        .collect()
                })
                .filter(|need: &Vec<(usize, usize)>| need.iter().all(|&(a, b)| !self.prefers(b, a)))
                .collect();
            if options.is_empty() {
                return Ok(false);
            }
            constraints.push(options);
        }
        constraints.sort_by_key(|o| o.len());
        let mut edges = vec![0u32; n];
        for (i, e) in edges.iter_mut().enumerate() {
            *e = self.pref[i];
        }
        self.satisfy(&constraints, 0, &mut edges, budget)
    }

    fn satisfy(
        &self,
        constraints: &[Vec<Vec<(usize, usize)>>],
        mut index: usize,
        edges: &mut Vec<u32>,
        budget: &Budget,
    ) -> Result<bool, OptimalityError> {
        budget.tick()?;
        let holds = |edges: &Vec<u32>, need: &Vec<(usize, usize)>| need.iter().all(|&(a, b)| edges[a] & (1 << b) != 0);
        while index < constraints.len() && constraints[index].iter().any(|need| holds(edges, need)) {
            index += 1;
        }
        let Some(options) = constraints.get(index) else {
            return Ok(true);
        };
        for need in options {
            if need.iter().any(|&(a, b)| edges[b] & (1 << a) != 0) {
                continue;
            }
            let saved = edges.clone();
            for &(a, b) in need {
                edges[a] |= 1 << b;
            }
            if acyclic(edges) && self.satisfy(constraints, index + 1, edges, budget)? {
                return Ok(true);
            }
            *edges = saved;
        }
        Ok(false)
    }

    fn optimal_masks(&self, kind: RepairKind, budget: &Budget) -> Result<Vec<u32>, OptimalityError> {
        let mut out = Vec::new();
        for &r in &self.repairs {
            let keep = match kind {
                RepairKind::S => true,
                RepairKind::P => !self.pareto_improved(r),
                RepairKind::G => !self.globally_improved(r),
                RepairKind::C => self.completion_optimal(r, budget)?,
            };
            if keep {
                out.push(r);
            }
        }
        Ok(out)
    }

    /// All `kind`-optimal repairs, sorted.
    pub fn optimal_repairs(&self, kind: RepairKind, budget: &Budget) -> Result<Vec<FactSet>, OptimalityError> {
        let mut out: Vec<FactSet> = self
            .optimal_masks(kind, budget)?
            .into_iter()
            .map(|m| self.to_set(m))
            .collect();
        out.sort();
        Ok(out)
    }

    pub fn is_optimal(&self, set: &FactSet, kind: RepairKind, budget: &Budget) -> Result<bool, OptimalityError> {
        let Some(mask) = self.to_mask(set) else {
            return Ok(false);
        };
        if !self.unconflicted.is_subset(set) || !self.repairs.contains(&mask) {
            return Ok(false);
        }
        Ok(match kind {
            RepairKind::S => true,
            RepairKind::P => !self.pareto_improved(mask),
            RepairKind::G => !self.globally_improved(mask),
            RepairKind::C => self.completion_optimal(mask, budget)?,
        })
    }

    /// The set of facts in every `kind`-optimal repair.
    pub fn intersection(&self, kind: RepairKind, budget: &Budget) -> Result<FactSet, OptimalityError> {
        let masks = self.optimal_masks(kind, budget)?;
        Ok(self.to_set(masks.iter().fold(u32::MAX, |acc, &m| acc & m) & self.all_mask()))
    }

    fn all_mask(&self) -> u32 {
        if self.local.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.local.len()) - 1
        }
    }

    pub fn brave(&self, answer: &AnswerCauses, kind: RepairKind, budget: &Budget) -> Result<bool, OptimalityError> {
        let reps = self.optimal_repairs(kind, budget)?;
        Ok(reps.iter().any(|r| answer.causes.iter().any(|c| c.facts.is_subset(r))))
    }

    pub fn ar(&self, answer: &AnswerCauses, kind: RepairKind, budget: &Budget) -> Result<bool, OptimalityError> {
        let reps = self.optimal_repairs(kind, budget)?;
        Ok(reps.iter().all(|r| answer.causes.iter().any(|c| c.facts.is_subset(r))))
    }

    pub fn iar(&self, answer: &AnswerCauses, kind: RepairKind, budget: &Budget) -> Result<bool, OptimalityError> {
        let inter = self.intersection(kind, budget)?;
        Ok(answer.causes.iter().any(|c| c.facts.is_subset(&inter)))
    }

    /// Attacks `(attackers, target)` by definition.
    fn attacks(&self) -> Vec<(u32, usize)> {
        let mut out = Vec::new();
        for &c in &self.conflicts {
            for alpha in Self::bits(c) {
                if Self::bits(c).all(|beta| !self.prefers(alpha, beta)) {
                    out.push((c & !(1 << alpha), alpha));
                }
            }
        }
        out
    }

    fn gamma(&self, attacks: &[(u32, usize)], b: u32) -> u32 {
        let attacked_from_b = |beta: usize| attacks.iter().any(|&(e, t)| t == beta && e & !b == 0);
        (0..self.local.len())
            .filter(|&alpha| {
                attacks
                    .iter()
                    .filter(|&&(_, t)| t == alpha)
                    .all(|&(e, _)| Self::bits(e).any(&attacked_from_b))
            })
            .fold(0, |m, alpha| m | 1 << alpha)
    }

    /// Γ(∅), as a fact set including the unconflicted facts.
    pub fn gamma_empty(&self) -> FactSet {
        self.to_set(self.gamma(&self.attacks(), 0))
    }

    /// Least fixpoint of Γ, including the unconflicted facts.
    pub fn grounded(&self) -> FactSet {
        let attacks = self.attacks();
        let mut b = 0;
        loop {
            let next = self.gamma(&attacks, b);
            if next == b {
                return self.to_set(b);
            }
            b = next;
        }
    }

    pub fn instance(&self) -> &PrioritizedInstance {
        self.instance
    }
}

fn acyclic(edges: &[u32]) -> bool {
    let n = edges.len();
    let mut reach = edges.to_vec();
    for k in 0..n {
        for i in 0..n {
            if reach[i] & (1 << k) != 0 {
                reach[i] |= reach[k];
            }
        }
    }
    (0..n).all(|i| reach[i] & (1 << i) == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{atom_answer, example1};
    use crate::model::InstanceBuilder;

    #[test]
    fn example1_by_definition() {
        let inst = example1();
        let o = Oracle::new(&inst).unwrap();
        let b = Budget::default();
        let names = |v: Vec<FactSet>| v.iter().map(|r| inst.names_of(r)).collect::<Vec<_>>();
        assert_eq!(o.optimal_repairs(RepairKind::S, &b).unwrap().len(), 4);
        let p = names(o.optimal_repairs(RepairKind::P, &b).unwrap());
        assert_eq!(p.len(), 2);
        assert!(p.contains(&vec!["a_b".into(), "b_a".into(), "c_b".into(), "d_a".into()]));
        let g = names(o.optimal_repairs(RepairKind::G, &b).unwrap());
        assert_eq!(g, [["a_a", "a_b", "c_a", "c_b"]]);
        assert_eq!(names(o.optimal_repairs(RepairKind::C, &b).unwrap()), g);
        assert_eq!(o.grounded(), inst.set_of(["a_b", "c_b"]).unwrap());
        assert_eq!(o.gamma_empty(), inst.set_of(["a_b"]).unwrap());
        assert!(o.ar(&atom_answer(&inst, "a_a"), RepairKind::G, &b).unwrap());
        assert!(!o.ar(&atom_answer(&inst, "a_a"), RepairKind::P, &b).unwrap());
        assert!(o.brave(&atom_answer(&inst, "b_a"), RepairKind::P, &b).unwrap());
        assert!(!o.brave(&atom_answer(&inst, "b_a"), RepairKind::G, &b).unwrap());
        for kind in RepairKind::PRIORITIZED {
            assert!(o.iar(&atom_answer(&inst, "c_b"), kind, &b).unwrap());
        }
    }

    #[test]
    fn empty_priority_makes_all_kinds_equal() {
        let inst = InstanceBuilder::new()
            .conflict("a", ["1", "2"])
            .conflict("b", ["2", "3", "4"])
            .build();
        let o = Oracle::new(&inst).unwrap();
        let b = Budget::default();
        let s = o.optimal_repairs(RepairKind::S, &b).unwrap();
        for kind in RepairKind::PRIORITIZED {
            assert_eq!(o.optimal_repairs(kind, &b).unwrap(), s);
        }
    }

    #[test]
    fn too_large_is_refused() {
        let mut b = InstanceBuilder::new();
        for i in 0..=ORACLE_MAX_FACTS / 2 {
            b = b.conflict(&format!("c{i}"), [format!("x{i}").as_str(), format!("y{i}").as_str()]);
        }
        let inst = b.build();
        assert!(matches!(Oracle::new(&inst), Err(OptimalityError::OracleTooLarge { .. })));
    }
}
