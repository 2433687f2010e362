//! Search for an optimal repair meeting a side condition.
//!
//! Conflicting facts are assigned in or out with unit propagation over three
//! kinds of constraints:
//!
//! * consistency: a conflict with all members but one in forces the last out;
//! * blocking: an excluded fact needs a blocker set fully inside the repair.
//!   For subset repairs any `C∖{α}` will do; for the prioritized kinds only
//!   attacker sets, which makes every complete assignment a Pareto-optimal
//!   repair. A fact whose blockers are all dead is forced in, and an excluded
//!   fact left with one live blocker forces that blocker in;
//! * the goal: either a given cause is inside the repair, or every cause has
//!   a member outside it.
//!
//! Complete assignments are then checked for global optimality or for the
//! existence of a completion, as the kind requires.

use crate::attack::AttackRelation;
use crate::factset::{FactId, FactSet};
use crate::model::PrioritizedInstance;
use crate::optimality::{find_completion, find_global_improvement, Budget, OptimalityError, RepairKind};

pub(crate) enum Goal<'a> {
    /// The repair contains this set.
    Contain(&'a FactSet),
    /// The repair contains none of these sets.
    AvoidAll(&'a [FactSet]),
}

const UNSET: i8 = 0;
const IN: i8 = 1;
const OUT: i8 = -1;

/// Flat list of sets with per-set offsets.
#[derive(Default)]
struct SetList {
    offsets: Vec<u32>,
    items: Vec<FactId>,
}

impl SetList {
    fn new() -> Self {
        Self {
            offsets: vec![0],
            items: Vec::new(),
        }
    }

    fn push(&mut self, items: impl IntoIterator<Item = FactId>) -> u32 {
        self.items.extend(items);
        self.offsets.push(self.items.len() as u32);
        (self.offsets.len() - 2) as u32
    }

    fn get(&self, i: u32) -> &[FactId] {
        &self.items[self.offsets[i as usize] as usize..self.offsets[i as usize + 1] as usize]
    }
}

struct Decision {
    fact: FactId,
    mark: usize,
    pos: usize,
    flipped: bool,
}

/// Finds a `kind`-optimal repair of `instance` satisfying `goal`.
///
/// With `binary` set, the instance must have only binary conflicts and the
/// propagation works on conflict partners directly.
pub(crate) fn find_optimal_repair(
    instance: &PrioritizedInstance,
    attacks: &AttackRelation,
    kind: RepairKind,
    goal: Goal<'_>,
    binary: bool,
    budget: &Budget,
) -> Result<Option<FactSet>, OptimalityError> {
    let binary = binary && instance.is_binary();
    let mut s = State::new(instance, attacks, kind, binary);

    match goal {
        Goal::Contain(set) => {
            for f in set.iter() {
                if instance.is_conflicting(f) {
                    s.queue.push((f, IN));
                }
            }
        }
        Goal::AvoidAll(causes) => {
            for cause in causes {
                let members: Vec<FactId> = cause.iter().filter(|&f| instance.is_conflicting(f)).collect();
                if members.is_empty() {
                    // This cause holds in every repair.
                    return Ok(None);
                }
                let k = s.causes.push(members.iter().copied());
                for &m in &members {
                    s.causes_of[m.index()].push(k);
                }
                s.cause_in.push(0);
                s.cause_out.push(0);
                if members.len() == 1 {
                    s.queue.push((members[0], OUT));
                }
            }
        }
    }
    // Facts with no blocker at all can never be excluded.
    for f in instance.conflicting().iter() {
        if s.alive[f.index()] == 0 {
            s.queue.push((f, IN));
        }
    }

    let mut order: Vec<FactId> = instance.conflicting().iter().collect();
    order.sort_by_key(|&f| (std::cmp::Reverse(instance.conflicts_of(f).len()), f));

    let mut decisions: Vec<Decision> = Vec::new();
    let mut pos = 0;
    loop {
        let ok = s.propagate();
        let mut backtrack = !ok;
        if ok {
            while pos < order.len() && s.val[order[pos].index()] != UNSET {
                pos += 1;
            }
            if pos < order.len() {
                budget.tick()?;
                let fact = order[pos];
                decisions.push(Decision {
                    fact,
                    mark: s.trail.len(),
                    pos,
                    flipped: false,
                });
                s.queue.push((fact, IN));
                continue;
            }
            let repair: FactSet = instance
                .facts()
                .filter(|&f| s.val[f.index()] != OUT)
                .collect();
            let accept = match kind {
                RepairKind::S | RepairKind::P => true,
                RepairKind::G => find_global_improvement(instance, &repair, budget)?.is_none(),
                RepairKind::C => find_completion(instance, attacks, &repair, budget)?.is_some(),
            };
            if accept {
                return Ok(Some(repair));
            }
            backtrack = true;
        }
        if backtrack {
            s.queue.clear();
            loop {
                let Some(d) = decisions.last_mut() else {
                    return Ok(None);
                };
                s.undo_to(d.mark);
                if !d.flipped {
                    d.flipped = true;
                    pos = d.pos;
                    s.queue.push((d.fact, OUT));
                    break;
                }
                decisions.pop();
            }
        }
    }
}

struct State<'a> {
    instance: &'a PrioritizedInstance,
    binary: bool,
    val: Vec<i8>,
    trail: Vec<FactId>,
    queue: Vec<(FactId, i8)>,
    cin: Vec<u32>,
    cout: Vec<u32>,
    blockers: SetList,
    blocker_target: Vec<FactId>,
    blockers_of: Vec<Vec<u32>>,
    blockers_with: Vec<Vec<u32>>,
    blocker_out: Vec<u32>,
    alive: Vec<u32>,
    causes: SetList,
    causes_of: Vec<Vec<u32>>,
    cause_in: Vec<u32>,
    cause_out: Vec<u32>,
}

impl<'a> State<'a> {
    fn new(instance: &'a PrioritizedInstance, attacks: &AttackRelation, kind: RepairKind, binary: bool) -> Self {
        let n = instance.num_facts();
        let m = instance.conflicts().len();
        let mut blockers = SetList::new();
        let mut blocker_target = Vec::new();
        let mut blockers_of = vec![Vec::new(); n];
        let mut blockers_with = vec![Vec::new(); n];
        let mut add = |target: FactId, members: &[FactId]| {
            let b = blockers.push(members.iter().copied());
            blocker_target.push(target);
            blockers_of[target.index()].push(b);
            for &x in members {
                blockers_with[x.index()].push(b);
            }
        };
        if kind == RepairKind::S {
            for c in instance.conflicts() {
                for &alpha in &c.members {
                    let rest: Vec<FactId> = c.members.iter().copied().filter(|&x| x != alpha).collect();
                    add(alpha, &rest);
                }
            }
        } else {
            for a in attacks.iter() {
                add(a.target, a.attackers);
            }
        }
        let alive = blockers_of.iter().map(|b| b.len() as u32).collect();
        let nb = blocker_target.len();
        Self {
            instance,
            binary,
            val: vec![UNSET; n],
            trail: Vec::new(),
            queue: Vec::new(),
            cin: vec![0; m],
            cout: vec![0; m],
            blockers,
            blocker_target,
            blockers_of,
            blockers_with,
            blocker_out: vec![0; nb],
            alive,
            causes: SetList::new(),
            causes_of: vec![Vec::new(); n],
            cause_in: Vec::new(),
            cause_out: Vec::new(),
        }
    }

    /// Drains the queue; false on contradiction.
    fn propagate(&mut self) -> bool {
        while let Some((f, v)) = self.queue.pop() {
            let cur = self.val[f.index()];
            if cur == v {
                continue;
            }
            if cur != UNSET {
                return false;
            }
            let ok = if v == IN { self.set_in(f) } else { self.set_out(f) };
            if !ok {
                return false;
            }
        }
        true
    }

    fn set_in(&mut self, f: FactId) -> bool {
        self.val[f.index()] = IN;
        self.trail.push(f);
        let mut ok = true;
        if self.binary {
            // Every conflict partner of an included fact is excluded.
            for &c in self.instance.conflicts_of(f) {
                let members = &self.instance.conflict(c as usize).members;
                let partner = if members[0] == f { members[1] } else { members[0] };
                match self.val[partner.index()] {
                    IN => ok = false,
                    UNSET => self.queue.push((partner, OUT)),
                    _ => {}
                }
                self.cin[c as usize] += 1;
            }
        } else {
            for &c in self.instance.conflicts_of(f) {
                let c = c as usize;
                self.cin[c] += 1;
                let members = &self.instance.conflict(c).members;
                if self.cin[c] as usize == members.len() {
                    ok = false;
                } else if self.cin[c] as usize + 1 == members.len() && self.cout[c] == 0 {
                    if let Some(&last) = members.iter().find(|&&m| self.val[m.index()] == UNSET) {
                        self.queue.push((last, OUT));
                    }
                }
            }
        }
        for i in 0..self.causes_of[f.index()].len() {
            let k = self.causes_of[f.index()][i];
            self.cause_in[k as usize] += 1;
            let members = self.causes.get(k);
            if self.cause_in[k as usize] as usize == members.len() {
                ok = false;
            } else if self.cause_in[k as usize] as usize + 1 == members.len() && self.cause_out[k as usize] == 0 {
                if let Some(&last) = members.iter().find(|&&m| self.val[m.index()] == UNSET) {
                    self.queue.push((last, OUT));
                }
            }
        }
        ok
    }

    fn set_out(&mut self, f: FactId) -> bool {
        self.val[f.index()] = OUT;
        self.trail.push(f);
        let mut ok = true;
        for &c in self.instance.conflicts_of(f) {
            self.cout[c as usize] += 1;
        }
        for &k in &self.causes_of[f.index()] {
            self.cause_out[k as usize] += 1;
        }
        for i in 0..self.blockers_with[f.index()].len() {
            let b = self.blockers_with[f.index()][i];
            self.blocker_out[b as usize] += 1;
            if self.blocker_out[b as usize] == 1 {
                let t = self.blocker_target[b as usize];
                self.alive[t.index()] -= 1;
                match self.val[t.index()] {
                    OUT => ok &= self.require_blocker(t),
                    UNSET if self.alive[t.index()] == 0 => self.queue.push((t, IN)),
                    _ => {}
                }
            }
        }
        ok && self.require_blocker(f)
    }

    /// `f` is out: it needs a live blocker, and a unique one is forced in.
    fn require_blocker(&mut self, f: FactId) -> bool {
        match self.alive[f.index()] {
            0 => false,
            1 => {
                let b = *self.blockers_of[f.index()]
                    .iter()
                    .find(|&&b| self.blocker_out[b as usize] == 0)
                    .expect("one live blocker");
                for &x in self.blockers.get(b) {
                    if self.val[x.index()] == UNSET {
                        self.queue.push((x, IN));
                    }
                }
                true
            }
            _ => true,
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let f = self.trail.pop().expect("trail entry");
            let v = std::mem::replace(&mut self.val[f.index()], UNSET);
            if v == IN {
                for &c in self.instance.conflicts_of(f) {
                    self.cin[c as usize] -= 1;
                }
                for &k in &self.causes_of[f.index()] {
                    self.cause_in[k as usize] -= 1;
                }
            } else {
                for &c in self.instance.conflicts_of(f) {
                    self.cout[c as usize] -= 1;
                }
                for &k in &self.causes_of[f.index()] {
                    self.cause_out[k as usize] -= 1;
                }
                for &b in &self.blockers_with[f.index()] {
                    self.blocker_out[b as usize] -= 1;
                    if self.blocker_out[b as usize] == 0 {
                        self.alive[self.blocker_target[b as usize].index()] += 1;
                    }
                }
            }
        }
    }
}
