//! Pareto and global improvements of a consistent set.

use crate::attack::AttackRelation;
use crate::factset::{FactId, FactSet};
use crate::model::PrioritizedInstance;

use super::{Budget, OptimalityError};

/// A consistent set improving `r` by a single preferred fact, if one exists.
///
/// `B` improves `r` through β iff `B' = (r ∖ {α | β ≻ α}) ∪ {β}` is
/// consistent, and `B'` is then itself an improvement. `B'` is inconsistent
/// exactly when some attacker set of β lies inside `r`, so the check reduces
/// to one attack lookup per fact outside `r`.
pub fn find_pareto_improvement(
    instance: &PrioritizedInstance,
    attacks: &AttackRelation,
    r: &FactSet,
) -> Option<FactSet> {
    let beta = instance
        .facts()
        .find(|&b| !r.contains(b) && !attacks.attacked_from(b, r))?;
    let mut out = r.clone();
    for &g in instance.dominates(beta) {
        out.remove(g);
    }
    out.insert(beta);
    Some(out)
}

/// A consistent `B ≠ r` such that every fact of `r∖B` is beaten by some fact
/// of `B∖r`, if one exists.
///
/// For an added set `A`, the best candidate is `(r ∖ Dom(A)) ∪ A` where
/// `Dom(A)` are the facts of `r` beaten by `A`, so the search is over `A`
/// alone. A violated conflict must lose one of its `r`-members, which means
/// adding a fact beating it; the branching on these fixes is disjoint, with
/// earlier alternatives forbidden in later branches.
pub fn find_global_improvement(
    instance: &PrioritizedInstance,
    r: &FactSet,
    budget: &Budget,
) -> Result<Option<FactSet>, OptimalityError> {
    let n = instance.num_facts();
    let mut search = GlobalSearch {
        instance,
        r,
        in_a: vec![false; n],
        a: Vec::new(),
        dom_count: vec![0; n],
        forbidden: vec![false; n],
        budget,
    };
    let outside: Vec<FactId> = instance.facts().filter(|&f| !r.contains(f)).collect();
    for &x in &outside {
        budget.tick()?;
        search.push(x);
        let found = search.dfs()?;
        search.pop();
        if found.is_some() {
            return Ok(found);
        }
        search.forbidden[x.index()] = true;
    }
    Ok(None)
}

struct GlobalSearch<'a> {
    instance: &'a PrioritizedInstance,
    r: &'a FactSet,
    in_a: Vec<bool>,
    a: Vec<FactId>,
    dom_count: Vec<u32>,
    forbidden: Vec<bool>,
    budget: &'a Budget,
}

impl GlobalSearch<'_> {
    #[inline]
    fn in_b(&self, f: FactId) -> bool {
        self.in_a[f.index()] || (self.r.contains(f) && self.dom_count[f.index()] == 0)
    }

    fn push(&mut self, x: FactId) {
        self.in_a[x.index()] = true;
        self.a.push(x);
        for &g in self.instance.dominates(x) {
            self.dom_count[g.index()] += 1;
        }
    }

    fn pop(&mut self) {
        let x = self.a.pop().expect("pop on empty added set");
        self.in_a[x.index()] = false;
        for &g in self.instance.dominates(x) {
            self.dom_count[g.index()] -= 1;
        }
    }

    /// Candidate fixes for a violated conflict: facts outside `r` beating one
    /// of its remaining `r`-members, most dominating first.
    fn fixes(&self, members: &[FactId]) -> Vec<FactId> {
        let mut out: Vec<FactId> = members
            .iter()
            .filter(|&&g| self.r.contains(g))
            .flat_map(|&g| self.instance.dominated_by(g).iter().copied())
            .filter(|&x| !self.r.contains(x) && !self.in_a[x.index()] && !self.forbidden[x.index()])
            .collect();
        out.sort_unstable();
        out.dedup();
        let weight = |x: FactId| {
            self.instance
                .dominates(x)
                .iter()
                .filter(|&&g| self.r.contains(g) && self.dom_count[g.index()] == 0)
                .count()
        };
        out.sort_by_key(|&x| std::cmp::Reverse(weight(x)));
        out
    }

    fn dfs(&mut self) -> Result<Option<FactSet>, OptimalityError> {
        let mut best: Option<Vec<FactId>> = None;
        for &x in &self.a {
            for &c in self.instance.conflicts_of(x) {
                let members = &self.instance.conflict(c as usize).members;
                if members.iter().all(|&m| self.in_b(m)) {
                    let fixes = self.fixes(members);
                    if fixes.is_empty() {
                        return Ok(None);
                    }
                    if best.as_ref().is_none_or(|b| fixes.len() < b.len()) {
                        best = Some(fixes);
                    }
                }
            }
        }
        let Some(fixes) = best else {
            let mut b: FactSet = self.r.iter().filter(|&f| self.dom_count[f.index()] == 0).collect();
            b.extend(self.a.iter().copied());
            return Ok(Some(b));
        };
        let mut result = None;
        let mut forbidden_here = Vec::new();
        for x in fixes {
            self.budget.tick()?;
            self.push(x);
            let found = self.dfs();
            self.pop();
            match found {
                Ok(Some(b)) => {
                    result = Some(b);
                    break;
                }
                Ok(None) => {}
                Err(e) => {
                    for &f in &forbidden_here {
                        self.forbidden[f] = false;
                    }
                    return Err(e);
                }
            }
            self.forbidden[x.index()] = true;
            forbidden_here.push(x.index());
        }
        for f in forbidden_here {
            self.forbidden[f] = false;
        }
        Ok(result)
    }
}
