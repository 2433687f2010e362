//! Enumeration of all repairs as complements of minimal hitting sets.

use crate::factset::{FactId, FactSet};
use crate::model::PrioritizedInstance;

use super::{Budget, OptimalityError};

/// Above this many conflicting facts, enumeration logs a warning.
pub const REPAIR_ENUMERATION_WARN_FACTS: usize = 25;

/// All repairs, sorted, without duplicates.
pub fn enumerate_repairs(instance: &PrioritizedInstance, budget: &Budget) -> Result<Vec<FactSet>, OptimalityError> {
    let mut out = Vec::new();
    for_each_repair(instance, budget, |r| {
        out.push(r.clone());
        true
    })?;
    out.sort();
    Ok(out)
}

/// Calls `visit` on each repair in search order until it returns false.
///
/// A repair is the complement of a minimal set hitting every conflict. The
/// search picks the first conflict not yet hit and branches on its members,
/// forbidding earlier members in later branches so each hitting set is built
/// once; a branch dies as soon as some chosen fact has no conflict it alone
/// hits, since it could never become necessary again.
pub fn for_each_repair(
    instance: &PrioritizedInstance,
    budget: &Budget,
    mut visit: impl FnMut(&FactSet) -> bool,
) -> Result<(), OptimalityError> {
    let conflicting = instance.conflicting().len();
    if conflicting > REPAIR_ENUMERATION_WARN_FACTS {
        log::warn!("enumerating repairs over {conflicting} conflicting facts");
    }
    let m = instance.conflicts().len();
    let mut state = Mhs {
        instance,
        hits: vec![0; m],
        hitting: Vec::new(),
        in_h: vec![false; instance.num_facts()],
        forbidden: vec![false; instance.num_facts()],
        budget,
    };
    state.dfs(&mut visit)?;
    Ok(())
}

struct Mhs<'a> {
    instance: &'a PrioritizedInstance,
    hits: Vec<u32>,
    hitting: Vec<FactId>,
    in_h: Vec<bool>,
    forbidden: Vec<bool>,
    budget: &'a Budget,
}

impl Mhs<'_> {
    fn has_private_conflict(&self, h: FactId) -> bool {
        self.instance
            .conflicts_of(h)
            .iter()
            .any(|&c| self.hits[c as usize] == 1)
    }

    fn dfs(&mut self, visit: &mut impl FnMut(&FactSet) -> bool) -> Result<bool, OptimalityError> {
        self.budget.tick()?;
        let Some(c) = self.hits.iter().position(|&h| h == 0) else {
            let repair: FactSet = self.instance.facts().filter(|f| !self.in_h[f.index()]).collect();
            return Ok(visit(&repair));
        };
        let members = self.instance.conflict(c).members.clone();
        let mut forbidden_here = Vec::new();
        let mut keep_going = true;
        for x in members {
            if self.forbidden[x.index()] {
                continue;
            }
            self.in_h[x.index()] = true;
            self.hitting.push(x);
            for &ci in self.instance.conflicts_of(x) {
                self.hits[ci as usize] += 1;
            }
            if self.hitting.iter().all(|&h| self.has_private_conflict(h)) {
                keep_going = self.dfs(visit)?;
            }
            for &ci in self.instance.conflicts_of(x) {
                self.hits[ci as usize] -= 1;
            }
            self.hitting.pop();
            self.in_h[x.index()] = false;
            if !keep_going {
                break;
            }
            self.forbidden[x.index()] = true;
            forbidden_here.push(x);
        }
        for x in forbidden_here {
            self.forbidden[x.index()] = false;
        }
        Ok(keep_going)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;
    use crate::model::InstanceBuilder;

    fn names(inst: &PrioritizedInstance, rs: &[FactSet]) -> Vec<Vec<String>> {
        let mut v: Vec<_> = rs.iter().map(|r| inst.names_of(r)).collect();
        v.sort();
        v
    }

    #[test]
    fn example1_has_four_repairs() {
        let inst = example1();
        let rs = enumerate_repairs(&inst, &Budget::default()).unwrap();
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let mut want = vec![
            s(&["a_a", "b_b", "c_a"]),
            s(&["b_a", "b_b", "d_a"]),
            s(&["a_a", "a_b", "c_a", "c_b"]),
            s(&["a_b", "b_a", "c_b", "d_a"]),
        ];
        want.sort();
        assert_eq!(names(&inst, &rs), want);
    }

    #[test]
    fn conflict_free_instance_has_one_repair() {
        let inst = InstanceBuilder::new().fact("x").fact("y").build();
        assert_eq!(enumerate_repairs(&inst, &Budget::default()).unwrap(), vec![inst.universe()]);
    }

    #[test]
    fn shared_fact_conflicts() {
        let inst = InstanceBuilder::new()
            .conflict("a", ["1", "2"])
            .conflict("b", ["1", "3"])
            .build();
        let rs = enumerate_repairs(&inst, &Budget::default()).unwrap();
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(names(&inst, &rs), vec![s(&["1"]), s(&["2", "3"])]);
    }

    #[test]
    fn visiting_can_stop_early() {
        let inst = example1();
        let mut seen = 0;
        for_each_repair(&inst, &Budget::default(), |_| {
            seen += 1;
            false
        })
        .unwrap();
        assert_eq!(seen, 1);
    }
}
