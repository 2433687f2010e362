//! Completions of the priority relation and the completion-optimality test.

use std::collections::HashMap;

use crate::attack::AttackRelation;
use crate::factset::{FactId, FactSet};
use crate::model::PrioritizedInstance;

use super::{is_repair, Budget, OptimalityError};

/// A total orientation of every co-conflicting pair, extending the base priority.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completion {
    /// Pairs `(α, β)` meaning α ≻' β, sorted.
    pub edges: Vec<(FactId, FactId)>,
}

impl Completion {
    /// Orients every co-conflicting pair along a topological order of the
    /// base priority plus `extra`. Returns `None` if that union has a cycle.
    pub fn extend(instance: &PrioritizedInstance, extra: &[(FactId, FactId)]) -> Option<Completion> {
        let n = instance.num_facts();
        let mut succ = vec![Vec::new(); n];
        let mut indeg = vec![0u32; n];
        for &(a, b) in instance.prefs().iter().chain(extra) {
            succ[a.index()].push(b.index());
            indeg[b.index()] += 1;
        }
        let mut rank = vec![usize::MAX; n];
        let mut queue: std::collections::VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut next = 0;
        while let Some(v) = queue.pop_front() {
            rank[v] = next;
            next += 1;
            for &w in &succ[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        if next < n {
            return None;
        }
        let mut edges = Vec::new();
        for c in instance.conflicts() {
            for (i, &a) in c.members.iter().enumerate() {
                for &b in &c.members[i + 1..] {
                    edges.push(if rank[a.index()] < rank[b.index()] { (a, b) } else { (b, a) });
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Some(Completion { edges })
    }

    pub fn prefers(&self, a: FactId, b: FactId) -> bool {
        self.edges.binary_search(&(a, b)).is_ok()
    }

    /// Checks totality over co-conflicting pairs, extension of the base and acyclicity.
    pub fn is_valid(&self, instance: &PrioritizedInstance) -> bool {
        let covers_pairs = instance.conflicts().iter().all(|c| {
            c.members.iter().enumerate().all(|(i, &a)| {
                c.members[i + 1..]
                    .iter()
                    .all(|&b| self.prefers(a, b) != self.prefers(b, a))
            })
        });
        let extends = instance.prefs().iter().all(|&(a, b)| self.prefers(a, b));
        let only_pairs = self.edges.iter().all(|&(a, b)| instance.co_conflicting(a, b));
        covers_pairs && extends && only_pairs && Completion::extend_raw(instance.num_facts(), &self.edges)
    }

    fn extend_raw(n: usize, edges: &[(FactId, FactId)]) -> bool {
        let mut succ = vec![Vec::new(); n];
        let mut indeg = vec![0u32; n];
        for &(a, b) in edges {
            succ[a.index()].push(b.index());
            indeg[b.index()] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &w in &succ[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    stack.push(w);
                }
            }
        }
        seen == n
    }
}

/// A completion under which `r` is optimal, if one exists.
///
/// Under a total priority, `r` is globally optimal iff every excluded fact α
/// has an attacker set inside `r`. Choosing such an attack for α forces each
/// attacker above α in the completion. The search picks one attack per
/// excluded fact, keeping the base priority plus forced edges acyclic.
pub fn find_completion(
    instance: &PrioritizedInstance,
    attacks: &AttackRelation,
    r: &FactSet,
    budget: &Budget,
) -> Result<Option<Completion>, OptimalityError> {
    if !is_repair(instance, r) {
        return Ok(None);
    }
    let mut excluded: Vec<(FactId, Vec<u32>)> = Vec::new();
    for alpha in instance.facts().filter(|&f| !r.contains(f)) {
        let options: Vec<u32> = attacks
            .on(alpha)
            .iter()
            .copied()
            .filter(|&a| attacks.get(a as usize).attackers.iter().all(|&b| r.contains(b)))
            .collect();
        if options.is_empty() {
            return Ok(None);
        }
        excluded.push((alpha, options));
    }
    excluded.sort_by_key(|(alpha, options)| (options.len(), *alpha));

    let n = instance.num_facts();
    let mut graph = OrientGraph {
        succ: vec![Vec::new(); n],
        count: HashMap::new(),
        mark: vec![0; n],
        epoch: 0,
    };
    for &(a, b) in instance.prefs() {
        graph.succ[a.index()].push(b.index() as u32);
        *graph.count.entry((a.0, b.0)).or_default() += 1;
    }
    let mut chosen: Vec<u32> = Vec::with_capacity(excluded.len());
    if assign(&excluded, 0, attacks, &mut graph, &mut chosen, budget)? {
        let extra: Vec<(FactId, FactId)> = chosen
            .iter()
            .zip(&excluded)
            .flat_map(|(&a, (alpha, _))| {
                attacks
                    .get(a as usize)
                    .attackers
                    .iter()
                    .map(move |&b| (b, *alpha))
            })
            .collect();
        return Ok(Completion::extend(instance, &extra));
    }
    Ok(None)
}

struct OrientGraph {
    succ: Vec<Vec<u32>>,
    count: HashMap<(u32, u32), u32>,
    mark: Vec<u32>,
    epoch: u32,
}

impl OrientGraph {
    fn reaches(&mut self, from: u32, to: u32) -> bool {
        self.epoch += 1;
        let epoch = self.epoch;
        let mut stack = vec![from];
        self.mark[from as usize] = epoch;
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            for i in 0..self.succ[v as usize].len() {
                let w = self.succ[v as usize][i];
                if self.mark[w as usize] != epoch {
                    self.mark[w as usize] = epoch;
                    stack.push(w);
                }
            }
        }
        false
    }

    /// Adds `a → b`; fails without changing anything if that closes a cycle.
    fn add(&mut self, a: u32, b: u32) -> bool {
        let c = self.count.get(&(a, b)).copied().unwrap_or(0);
        if c == 0 && self.reaches(b, a) {
            return false;
        }
        if c == 0 {
            self.succ[a as usize].push(b);
        }
        self.count.insert((a, b), c + 1);
        true
    }

    fn remove(&mut self, a: u32, b: u32) {
        let c = self.count[&(a, b)] - 1;
        if c == 0 {
            self.count.remove(&(a, b));
            let list = &mut self.succ[a as usize];
            let pos = list.iter().rposition(|&x| x == b).expect("edge present");
            list.swap_remove(pos);
        } else {
            self.count.insert((a, b), c);
        }
    }
}

fn assign(
    excluded: &[(FactId, Vec<u32>)],
    i: usize,
    attacks: &AttackRelation,
    graph: &mut OrientGraph,
    chosen: &mut Vec<u32>,
    budget: &Budget,
) -> Result<bool, OptimalityError> {
    let Some((alpha, options)) = excluded.get(i) else {
        return Ok(true);
    };
    for &a in options {
        budget.tick()?;
        let attackers = attacks.get(a as usize).attackers;
        let mut added = 0;
        for &b in attackers {
            if !graph.add(b.0, alpha.0) {
                break;
            }
            added += 1;
        }
        if added == attackers.len() {
            chosen.push(a);
            if assign(excluded, i + 1, attacks, graph, chosen, budget)? {
                return Ok(true);
            }
            chosen.pop();
        }
        for &b in &attackers[..added] {
            graph.remove(b.0, alpha.0);
        }
    }
    Ok(false)
}
