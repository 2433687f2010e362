//! Prioritized instances: facts, conflicts, priority relation and query-answer causes.
//!
//! Consistency is purely syntactic here: a set of facts is consistent iff it
//! contains no conflict. The logical theory that produced the conflicts is
//! never seen at runtime.

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::factset::{FactId, FactSet};

/// One conflict: a minimal inconsistent set of facts, with its external label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conflict {
    pub label: String,
    /// Members in ascending id order, without duplicates.
    pub members: Vec<FactId>,
}

impl Conflict {
    pub fn new(label: impl Into<String>, mut members: Vec<FactId>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self {
            label: label.into(),
            members,
        }
    }

    pub fn contains(&self, fact: FactId) -> bool {
        self.members.binary_search(&fact).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_subset_of(&self, set: &FactSet) -> bool {
        self.members.iter().all(|&m| set.contains(m))
    }

    fn is_subset_of_conflict(&self, other: &Conflict) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }
}

/// A fact base with its conflicts and a priority relation over conflicting facts.
///
/// Immutable once built, apart from [`PrioritizedInstance::intern_unconflicted`],
/// which only appends facts that occur in no conflict.
#[derive(Clone, Debug)]
pub struct PrioritizedInstance {
    names: Vec<String>,
    index: HashMap<String, FactId>,
    conflicts: Vec<Conflict>,
    prefs: Vec<(FactId, FactId)>,
    dominates: Vec<Vec<FactId>>,
    dominated_by: Vec<Vec<FactId>>,
    fact_conflicts: Vec<Vec<u32>>,
    conflicting: FactSet,
    binary: bool,
    removed: Vec<String>,
}

impl PrioritizedInstance {
    /// Assembles an instance without checking any invariant; see [`validate`].
    ///
    /// Panics if a conflict or pref edge mentions an id `>= names.len()`.
    pub fn from_parts(
        names: Vec<String>,
        conflicts: Vec<Conflict>,
        prefs: Vec<(FactId, FactId)>,
    ) -> Self {
        let n = names.len();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), FactId::from(i)))
            .collect();
        let mut prefs = prefs;
        prefs.sort_unstable();
        prefs.dedup();
        let mut dominates = vec![Vec::new(); n];
        let mut dominated_by = vec![Vec::new(); n];
        for &(a, b) in &prefs {
            assert!(a.index() < n && b.index() < n, "pref edge out of range");
            dominates[a.index()].push(b);
            dominated_by[b.index()].push(a);
        }
        for list in dominated_by.iter_mut() {
            list.sort_unstable();
        }
        let mut fact_conflicts = vec![Vec::new(); n];
        let mut conflicting = FactSet::with_capacity(n);
        for (ci, conflict) in conflicts.iter().enumerate() {
            for &m in &conflict.members {
                assert!(m.index() < n, "conflict member out of range");
                fact_conflicts[m.index()].push(ci as u32);
                conflicting.insert(m);
            }
        }
        let binary = conflicts.iter().all(|c| c.len() == 2);
        Self {
            names,
            index,
            conflicts,
            prefs,
            dominates,
            dominated_by,
            fact_conflicts,
            conflicting,
            binary,
            removed: Vec::new(),
        }
    }

    pub fn empty() -> Self {
        Self::from_parts(Vec::new(), Vec::new(), Vec::new())
    }

    pub fn num_facts(&self) -> usize {
        self.names.len()
    }

    pub fn universe(&self) -> FactSet {
        FactSet::full(self.num_facts())
    }

    pub fn facts(&self) -> impl Iterator<Item = FactId> + '_ {
        (0..self.names.len()).map(FactId::from)
    }

    pub fn name(&self, id: FactId) -> &str {
        &self.names[id.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id_of(&self, name: &str) -> Option<FactId> {
        self.index.get(name).copied()
    }

    /// Looks up a set of facts by name.
    pub fn set_of<'a, I>(&self, names: I) -> Result<FactSet, ModelError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        names
            .into_iter()
            .map(|n| {
                self.id_of(n)
                    .ok_or_else(|| ModelError::UnknownFact(n.to_string()))
            })
            .collect()
    }

    /// Sorted names of the facts in `set`, for display.
    pub fn names_of(&self, set: &FactSet) -> Vec<String> {
        let mut out: Vec<String> = set.iter().map(|f| self.name(f).to_string()).collect();
        out.sort();
        out
    }

    pub fn conflicts(&self) -> &[Conflict] {
        &self.conflicts
    }

    pub fn conflict(&self, index: usize) -> &Conflict {
        &self.conflicts[index]
    }

    /// Indices of the conflicts containing `fact`, ascending.
    pub fn conflicts_of(&self, fact: FactId) -> &[u32] {
        &self.fact_conflicts[fact.index()]
    }

    /// Pref edges `(α, β)` meaning α ≻ β, sorted and deduplicated.
    pub fn prefs(&self) -> &[(FactId, FactId)] {
        &self.prefs
    }

    #[inline]
    pub fn prefers(&self, a: FactId, b: FactId) -> bool {
        self.dominates[a.index()].binary_search(&b).is_ok()
    }

    /// Facts β with `fact ≻ β`.
    pub fn dominates(&self, fact: FactId) -> &[FactId] {
        &self.dominates[fact.index()]
    }

    /// Facts β with `β ≻ fact`.
    pub fn dominated_by(&self, fact: FactId) -> &[FactId] {
        &self.dominated_by[fact.index()]
    }

    /// Facts that occur in at least one conflict.
    pub fn conflicting(&self) -> &FactSet {
        &self.conflicting
    }

    pub fn is_conflicting(&self, fact: FactId) -> bool {
        self.conflicting.contains(fact)
    }

    /// Facts occurring in no conflict; they belong to every repair.
    pub fn unconflicted(&self) -> FactSet {
        self.universe().difference(&self.conflicting)
    }

    /// True iff every conflict has exactly two members (vacuously true without conflicts).
    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn co_conflicting(&self, a: FactId, b: FactId) -> bool {
        a != b
            && self
                .conflicts_of(a)
                .iter()
                .any(|&c| self.conflicts[c as usize].contains(b))
    }

    /// Names of self-inconsistent facts dropped by [`preprocess`].
    pub fn removed_facts(&self) -> &[String] {
        &self.removed
    }

    /// Adds a fact that occurs in no conflict, or returns the existing id.
    pub fn intern_unconflicted(&mut self, name: &str) -> FactId {
        if let Some(id) = self.id_of(name) {
            return id;
        }
        let id = FactId::from(self.names.len());
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.dominates.push(Vec::new());
        self.dominated_by.push(Vec::new());
        self.fact_conflicts.push(Vec::new());
        id
    }

    /// True iff no conflict is a subset of `set`.
    pub fn is_consistent(&self, set: &FactSet) -> bool {
        set.iter().all(|f| {
            self.conflicts_of(f).iter().all(|&c| {
                let conflict = &self.conflicts[c as usize];
                // Only test each conflict from its smallest member present.
                conflict.members[0] != f || !conflict.is_subset_of(set)
            })
        })
    }

    /// Maps a set of this instance onto `target` by fact name. Facts unknown
    /// to `target` are dropped.
    pub fn translate_to(&self, set: &FactSet, target: &PrioritizedInstance) -> FactSet {
        set.iter()
            .filter_map(|f| target.id_of(self.name(f)))
            .collect()
    }

    /// Maps an answer of this instance onto `target` by fact name.
    pub fn translate_answer(&self, answer: &AnswerCauses, target: &PrioritizedInstance) -> AnswerCauses {
        AnswerCauses {
            answer_id: answer.answer_id.clone(),
            causes: answer
                .causes
                .iter()
                .map(|c| Cause {
                    label: c.label.clone(),
                    facts: self.translate_to(&c.facts, target),
                })
                .collect(),
        }
    }

    /// Structural equality up to fact renumbering: same names, same labelled
    /// conflicts, same pref edges.
    pub fn same_structure(&self, other: &PrioritizedInstance) -> bool {
        let names = |i: &PrioritizedInstance| i.names.iter().cloned().collect::<HashSet<_>>();
        let conflicts = |i: &PrioritizedInstance| {
            i.conflicts
                .iter()
                .map(|c| {
                    let mut m: Vec<&str> = c.members.iter().map(|&f| i.name(f)).collect();
                    m.sort();
                    (c.label.clone(), m.join(","))
                })
                .collect::<Vec<_>>()
        };
        let prefs = |i: &PrioritizedInstance| {
            i.prefs
                .iter()
                .map(|&(a, b)| (i.name(a).to_string(), i.name(b).to_string()))
                .collect::<HashSet<_>>()
        };
        let mut ca = conflicts(self);
        let mut cb = conflicts(other);
        ca.sort();
        cb.sort();
        names(self) == names(other) && ca == cb && prefs(self) == prefs(other)
    }
}

/// Convenience builder interning fact names in first-appearance order.
#[derive(Default)]
pub struct InstanceBuilder {
    names: Vec<String>,
    index: HashMap<String, FactId>,
    conflicts: Vec<Conflict>,
    prefs: Vec<(FactId, FactId)>,
}

impl InstanceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> FactId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = FactId::from(self.names.len());
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn fact(mut self, name: &str) -> Self {
        self.intern(name);
        self
    }

    pub fn conflict<'a>(mut self, label: &str, members: impl IntoIterator<Item = &'a str>) -> Self {
        let ids = members.into_iter().map(|m| self.intern(m)).collect();
        self.conflicts.push(Conflict::new(label, ids));
        self
    }

    pub fn pref(mut self, better: &str, worse: &str) -> Self {
        let a = self.intern(better);
        let b = self.intern(worse);
        self.prefs.push((a, b));
        self
    }

    pub fn build(self) -> PrioritizedInstance {
        PrioritizedInstance::from_parts(self.names, self.conflicts, self.prefs)
    }
}

/// A cause of a query answer: a minimal consistent set of facts entailing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cause {
    pub label: String,
    pub facts: FactSet,
}

/// One potential answer, represented by its causes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerCauses {
    pub answer_id: String,
    pub causes: Vec<Cause>,
}

impl AnswerCauses {
    pub fn new(answer_id: impl Into<String>) -> Self {
        Self {
            answer_id: answer_id.into(),
            causes: Vec::new(),
        }
    }

    /// Builds an answer from named causes, looking facts up in `instance`.
    pub fn from_names<'a>(
        answer_id: &str,
        instance: &PrioritizedInstance,
        causes: impl IntoIterator<Item = &'a [&'a str]>,
    ) -> Result<Self, ModelError> {
        let mut answer = Self::new(answer_id);
        for (i, names) in causes.into_iter().enumerate() {
            answer.causes.push(Cause {
                label: format!("k{}", i + 1),
                facts: instance.set_of(names.iter().copied())?,
            });
        }
        Ok(answer)
    }

    /// Single-cause answer `{fact}`, used for per-fact membership questions.
    pub fn singleton(instance: &PrioritizedInstance, fact: FactId) -> Self {
        Self {
            answer_id: instance.name(fact).to_string(),
            causes: vec![Cause {
                label: "k1".to_string(),
                facts: std::iter::once(fact).collect(),
            }],
        }
    }

    /// Union of all causes; the seed for localization.
    pub fn cause_union(&self) -> FactSet {
        let mut out = FactSet::new();
        for c in &self.causes {
            out.union_with(&c.facts);
        }
        out
    }

    /// True iff some cause is a subset of `set`.
    pub fn holds_in(&self, set: &FactSet) -> bool {
        self.causes.iter().any(|c| c.facts.is_subset(set))
    }
}

/// True iff some cause of `answer` is a subset of `set`.
pub fn holds_in(set: &FactSet, answer: &AnswerCauses) -> bool {
    answer.holds_in(set)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationMode {
    Strict,
    Lenient,
}

/// A violated input invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    CyclicPriority { cycle: Vec<String> },
    PrefNotCoConflicting { better: String, worse: String },
    EmptyConflict { conflict: String },
    DuplicateConflict { conflict: String, duplicate_of: String },
    NonMinimalConflict { conflict: String, contains: String },
    EmptyCause { answer: String, cause: String },
    InconsistentCause { answer: String, cause: String, conflict: String },
    NonMinimalCause { answer: String, cause: String, contains: String },
}

impl Violation {
    /// Violations that lenient mode can fix by dropping data.
    pub fn is_repairable(&self) -> bool {
        matches!(
            self,
            Violation::PrefNotCoConflicting { .. }
                | Violation::DuplicateConflict { .. }
                | Violation::NonMinimalConflict { .. }
                | Violation::NonMinimalCause { .. }
        )
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("priority relation has a cycle: {}", .0.join(" > "))]
    CyclicPriority(Vec<String>),
    #[error("pref({0},{1}) relates facts that share no conflict")]
    PrefNotCoConflicting(String, String),
    #[error("conflict {0} has no members")]
    EmptyConflict(String),
    #[error("conflict {0} duplicates conflict {1}")]
    DuplicateConflict(String, String),
    #[error("conflict {0} is not minimal: it contains conflict {1}")]
    NonMinimalConflict(String, String),
    #[error("cause {1} of answer {0} has no facts")]
    EmptyCause(String, String),
    #[error("cause {1} of answer {0} contains conflict {2}")]
    InconsistentCause(String, String, String),
    #[error("cause {1} of answer {0} is not minimal: it contains cause {2}")]
    NonMinimalCause(String, String, String),
    #[error("unknown fact {0}")]
    UnknownFact(String),
    #[error("grounded fixpoint contains conflict {0}; the conflict list is not minimal")]
    InternalInconsistency(String),
}

impl From<Violation> for ModelError {
    fn from(v: Violation) -> Self {
        match v {
            Violation::CyclicPriority { cycle } => ModelError::CyclicPriority(cycle),
            Violation::PrefNotCoConflicting { better, worse } => {
                ModelError::PrefNotCoConflicting(better, worse)
            }
            Violation::EmptyConflict { conflict } => ModelError::EmptyConflict(conflict),
            Violation::DuplicateConflict {
                conflict,
                duplicate_of,
            } => ModelError::DuplicateConflict(conflict, duplicate_of),
            Violation::NonMinimalConflict { conflict, contains } => {
                ModelError::NonMinimalConflict(conflict, contains)
            }
            Violation::EmptyCause { answer, cause } => ModelError::EmptyCause(answer, cause),
            Violation::InconsistentCause {
                answer,
                cause,
                conflict,
            } => ModelError::InconsistentCause(answer, cause, conflict),
            Violation::NonMinimalCause {
                answer,
                cause,
                contains,
            } => ModelError::NonMinimalCause(answer, cause, contains),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    /// Every violation found, including the ones lenient mode repaired.
    pub violations: Vec<Violation>,
    /// Human-readable notes on what lenient mode dropped.
    pub repairs: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Output of [`validate`]: the (possibly repaired) inputs and the report.
#[derive(Clone, Debug)]
pub struct Validated {
    pub instance: PrioritizedInstance,
    pub answers: Vec<AnswerCauses>,
    pub report: ValidationReport,
}

/// Checks the input invariants of an instance and its answers.
///
/// Strict mode fails on the first violation. Lenient mode drops duplicate and
/// non-minimal conflicts, pref edges between facts sharing no conflict, and
/// non-minimal causes, and fails only on violations it cannot repair.
///
/// Conflicts that mention a self-inconsistent fact (one forming a singleton
/// conflict) are exempt from the minimality check: [`preprocess`] deletes them.
pub fn validate(
    instance: &PrioritizedInstance,
    answers: &[AnswerCauses],
    mode: ValidationMode,
) -> Result<Validated, ModelError> {
    let mut report = ValidationReport::default();

    // Conflicts.
    let doomed: FactSet = instance
        .conflicts
        .iter()
        .filter(|c| c.len() == 1)
        .map(|c| c.members[0])
        .collect();
    let mut keep_conflict = vec![true; instance.conflicts.len()];
    for c in &instance.conflicts {
        if c.is_empty() {
            report.violations.push(Violation::EmptyConflict {
                conflict: c.label.clone(),
            });
        }
    }
    for (ci, c) in instance.conflicts.iter().enumerate() {
        if c.is_empty() {
            continue;
        }
        // Candidates sharing c's first member cover every subset of c.
        for &oi in instance.conflicts_of(c.members[0]) {
            let oi = oi as usize;
            let other = &instance.conflicts[oi];
            if oi == ci || !keep_conflict[oi] {
                continue;
            }
            if other.members == c.members && oi < ci {
                report.violations.push(Violation::DuplicateConflict {
                    conflict: c.label.clone(),
                    duplicate_of: other.label.clone(),
                });
                keep_conflict[ci] = false;
                break;
            }
        }
    }
    for (ci, c) in instance.conflicts.iter().enumerate() {
        if c.is_empty() || !keep_conflict[ci] || c.members.iter().any(|&m| doomed.contains(m)) {
            continue;
        }
        let mut candidates: Vec<usize> = c
            .members
            .iter()
            .flat_map(|&m| instance.conflicts_of(m).iter().map(|&x| x as usize))
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        for oi in candidates {
            let other = &instance.conflicts[oi];
            if oi != ci
                && keep_conflict[oi]
                && other.len() < c.len()
                && !other.is_empty()
                && other.is_subset_of_conflict(c)
            {
                report.violations.push(Violation::NonMinimalConflict {
                    conflict: c.label.clone(),
                    contains: other.label.clone(),
                });
                keep_conflict[ci] = false;
                break;
            }
        }
    }
    let conflicts: Vec<Conflict> = instance
        .conflicts
        .iter()
        .zip(&keep_conflict)
        .filter(|(c, &k)| k && !c.is_empty())
        .map(|(c, _)| c.clone())
        .collect();
    let pruned = PrioritizedInstance::from_parts(instance.names.clone(), conflicts, Vec::new());

    // Priority relation.
    let mut prefs = Vec::with_capacity(instance.prefs.len());
    for &(a, b) in &instance.prefs {
        if a != b && !pruned.co_conflicting(a, b) {
            report.violations.push(Violation::PrefNotCoConflicting {
                better: instance.name(a).to_string(),
                worse: instance.name(b).to_string(),
            });
        } else {
            prefs.push((a, b));
        }
    }
    if let Some(cycle) = find_cycle(instance.num_facts(), &prefs) {
        report.violations.push(Violation::CyclicPriority {
            cycle: cycle.iter().map(|&f| instance.name(f).to_string()).collect(),
        });
    }

    // Answers.
    let mut repaired_answers = Vec::with_capacity(answers.len());
    for answer in answers {
        let mut keep = vec![true; answer.causes.len()];
        for cause in &answer.causes {
            if cause.facts.is_empty() {
                report.violations.push(Violation::EmptyCause {
                    answer: answer.answer_id.clone(),
                    cause: cause.label.clone(),
                });
                continue;
            }
            if let Some(c) = cause
                .facts
                .iter()
                .filter(|f| f.index() < instance.num_facts())
                .flat_map(|f| instance.conflicts_of(f))
                .map(|&ci| &instance.conflicts[ci as usize])
                .find(|c| c.is_subset_of(&cause.facts))
            {
                report.violations.push(Violation::InconsistentCause {
                    answer: answer.answer_id.clone(),
                    cause: cause.label.clone(),
                    conflict: c.label.clone(),
                });
            }
        }
        for i in 0..answer.causes.len() {
            for j in 0..answer.causes.len() {
                if i == j || !keep[j] {
                    continue;
                }
                let (ci, cj) = (&answer.causes[i].facts, &answer.causes[j].facts);
                let strictly = cj.is_subset(ci) && (ci != cj || j < i);
                if strictly && !cj.is_empty() {
                    report.violations.push(Violation::NonMinimalCause {
                        answer: answer.answer_id.clone(),
                        cause: answer.causes[i].label.clone(),
                        contains: answer.causes[j].label.clone(),
                    });
                    keep[i] = false;
                    break;
                }
            }
        }
        repaired_answers.push(AnswerCauses {
            answer_id: answer.answer_id.clone(),
            causes: answer
                .causes
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(c, _)| c.clone())
                .collect(),
        });
    }

    let fatal = match mode {
        ValidationMode::Strict => report.violations.first().cloned(),
        ValidationMode::Lenient => report
            .violations
            .iter()
            .find(|v| !v.is_repairable())
            .cloned(),
    };
    if let Some(v) = fatal {
        return Err(v.into());
    }

    let (instance, answers) = match mode {
        ValidationMode::Strict => (instance.clone(), answers.to_vec()),
        ValidationMode::Lenient => {
            for v in &report.violations {
                report.repairs.push(match v {
                    Violation::PrefNotCoConflicting { better, worse } => {
                        format!("dropped pref({better},{worse})")
                    }
                    Violation::DuplicateConflict { conflict, .. }
                    | Violation::NonMinimalConflict { conflict, .. } => {
                        format!("dropped conflict {conflict}")
                    }
                    Violation::NonMinimalCause { answer, cause, .. } => {
                        format!("dropped cause {cause} of answer {answer}")
                    }
                    _ => unreachable!("fatal violations return early"),
                });
            }
            let mut repaired =
                PrioritizedInstance::from_parts(pruned.names.clone(), pruned.conflicts.clone(), prefs);
            repaired.removed = instance.removed.clone();
            (repaired, repaired_answers)
        }
    };
    Ok(Validated {
        instance,
        answers,
        report,
    })
}

/// Some directed cycle of the relation, if any (a self-loop counts).
fn find_cycle(n: usize, edges: &[(FactId, FactId)]) -> Option<Vec<FactId>> {
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in edges {
        succ[a.index()].push(b.index());
    }
    // Iterative three-colour DFS.
    let mut colour = vec![0u8; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if colour[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        colour[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                match colour[w] {
                    0 => {
                        colour[w] = 1;
                        parent[w] = v;
                        stack.push((w, 0));
                    }
                    1 => {
                        let mut cycle = vec![FactId::from(w)];
                        let mut x = v;
                        while x != w {
                            cycle.push(FactId::from(x));
                            x = parent[x];
                        }
                        cycle.reverse();
                        cycle.rotate_right(1);
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                colour[v] = 2;
                stack.pop();
            }
        }
    }
    None
}

/// Removes self-inconsistent facts.
///
/// A fact forming a singleton conflict belongs to no repair. It is deleted
/// together with every conflict that mentions it (such a conflict constrains
/// nothing once the fact is gone) and every pref edge touching it. Pref edges
/// that no longer relate co-conflicting facts are dropped too.
pub fn preprocess(instance: &PrioritizedInstance) -> PrioritizedInstance {
    let doomed: FactSet = instance
        .conflicts
        .iter()
        .filter(|c| c.len() == 1)
        .map(|c| c.members[0])
        .collect();
    if doomed.is_empty() {
        return instance.clone();
    }
    let keep = instance.universe().difference(&doomed);
    let restricted = restrict(instance, &keep);
    let prefs = restricted
        .prefs
        .iter()
        .copied()
        .filter(|&(a, b)| restricted.co_conflicting(a, b))
        .collect();
    let mut out = PrioritizedInstance::from_parts(restricted.names, restricted.conflicts, prefs);
    out.removed = instance.removed.clone();
    out.removed.extend(doomed.iter().map(|f| instance.name(f).to_string()));
    out
}

/// The sub-instance over `keep`.
///
/// Conflicts are kept iff fully inside `keep`, pref edges iff their endpoints
/// still share a kept conflict. Facts are renumbered densely in ascending original order; names are
/// preserved.
pub fn restrict(instance: &PrioritizedInstance, keep: &FactSet) -> PrioritizedInstance {
    let mut remap = vec![u32::MAX; instance.num_facts()];
    let mut names = Vec::new();
    for f in keep.iter().filter(|f| f.index() < instance.num_facts()) {
        remap[f.index()] = names.len() as u32;
        names.push(instance.name(f).to_string());
    }
    let map = |f: FactId| FactId(remap[f.index()]);
    let kept: Vec<&Conflict> = instance
        .conflicts
        .iter()
        .filter(|c| c.members.iter().all(|&m| remap[m.index()] != u32::MAX))
        .collect();
    let prefs = instance
        .prefs
        .iter()
        .filter(|(a, b)| kept.iter().any(|c| c.contains(*a) && c.contains(*b)))
        .map(|&(a, b)| (map(a), map(b)))
        .collect();
    let conflicts = kept
        .into_iter()
        .map(|c| Conflict {
            label: c.label.clone(),
            members: c.members.iter().map(|&m| map(m)).collect(),
        })
        .collect();
    let mut out = PrioritizedInstance::from_parts(names, conflicts, prefs);
    out.removed = instance.removed.clone();
    out
}
