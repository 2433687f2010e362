//! Deciding query answers.
//!
//! A [`Solver`] holds one instance with its attack relation, grounded repair
//! and Γ(∅). Each decision first tries cheap sufficient conditions (cause
//! inside Γ(∅), cause inside the grounded repair, and for globally-optimal
//! semantics the bounds given by Pareto-optimal semantics) before running a
//! search on the localized sub-instance.

mod search;

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use dashmap::DashMap;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::attack::{compute_attacks, grounded_repair, AttackRelation, GroundedResult};
use crate::factset::{FactId, FactSet};
use crate::localize::{reach, reach_components, LocalizeError, ReachMode};
use crate::model::{restrict, AnswerCauses, ModelError, PrioritizedInstance};
use crate::optimality::{Budget, OptimalityError, RepairKind, DEFAULT_BUDGET};

use search::{find_optimal_repair, Goal};

/// A query-answering semantics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Semantics {
    Grounded,
    TrivialPiar,
    Brave(RepairKind),
    Ar(RepairKind),
    Iar(RepairKind),
}

impl Semantics {
    pub fn kind(self) -> Option<RepairKind> {
        match self {
            Semantics::Brave(k) | Semantics::Ar(k) | Semantics::Iar(k) => Some(k),
            _ => None,
        }
    }

    /// Grounded semantics plus brave and AR for P, G and C.
    pub fn default_grid() -> Vec<Semantics> {
        let mut out = vec![Semantics::Grounded];
        for kind in RepairKind::PRIORITIZED {
            out.push(Semantics::Brave(kind));
            out.push(Semantics::Ar(kind));
        }
        out
    }

    /// Every semantics over every kind, plus grounded and trivially P-IAR.
    pub fn all() -> Vec<Semantics> {
        let mut out = vec![Semantics::Grounded, Semantics::TrivialPiar];
        for kind in RepairKind::ALL {
            out.push(Semantics::Brave(kind));
            out.push(Semantics::Ar(kind));
            out.push(Semantics::Iar(kind));
        }
        out
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lower = |k: RepairKind| k.to_string().to_lowercase();
        match self {
            Semantics::Grounded => f.write_str("grounded"),
            Semantics::TrivialPiar => f.write_str("trivial-p-iar"),
            Semantics::Brave(k) => write!(f, "{}-brave", lower(*k)),
            Semantics::Ar(k) => write!(f, "{}-ar", lower(*k)),
            Semantics::Iar(k) => write!(f, "{}-iar", lower(*k)),
        }
    }
}

impl FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "grounded" | "gr" => return Ok(Semantics::Grounded),
            "trivial-p-iar" | "tpiar" => return Ok(Semantics::TrivialPiar),
            _ => {}
        }
        let err = || format!("unknown semantics {s:?} (expected grounded, trivial-p-iar or <s|p|g|c>-<brave|ar|iar>)");
        let (kind, sem) = lower.split_once('-').ok_or_else(err)?;
        let kind: RepairKind = kind.parse().map_err(|_| err())?;
        match sem {
            "brave" => Ok(Semantics::Brave(kind)),
            "ar" => Ok(Semantics::Ar(kind)),
            "iar" => Ok(Semantics::Iar(kind)),
            _ => Err(err()),
        }
    }
}

impl Serialize for Semantics {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    /// The search budget ran out.
    Unknown,
}

impl Verdict {
    fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Unknown => "unknown",
        })
    }
}

/// Which stage of the pipeline settled a decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Tier {
    /// A cause lies inside Γ(∅).
    Trivial,
    /// A cause lies inside the grounded repair.
    Grounded,
    /// Settled from Pareto-optimal semantics (globally-optimal kinds only).
    ParetoBound,
    /// Settled by search.
    Direct,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decision {
    pub answer_id: String,
    pub semantics: Semantics,
    pub verdict: Verdict,
    pub tier: Tier,
    /// Size of the largest sub-instance searched.
    pub localized_facts: usize,
    pub search_nodes: u64,
    pub elapsed_ms: f64,
}

/// Localization policy for searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalizeMode {
    Off,
    /// Pareto-optimal repairs only; refused for G and C.
    Strong,
    Weak,
    /// Strong for Pareto-optimal repairs, weak otherwise.
    Auto,
}

impl fmt::Display for LocalizeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocalizeMode::Off => "off",
            LocalizeMode::Strong => "strong",
            LocalizeMode::Weak => "weak",
            LocalizeMode::Auto => "auto",
        })
    }
}

impl FromStr for LocalizeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "off" => Ok(LocalizeMode::Off),
            "strong" => Ok(LocalizeMode::Strong),
            "weak" => Ok(LocalizeMode::Weak),
            "auto" => Ok(LocalizeMode::Auto),
            _ => Err(format!("unknown localization mode {s:?} (expected off, strong, weak or auto)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverOptions {
    pub localize: LocalizeMode,
    /// Use the binary-conflict procedures when the instance is binary.
    pub binary_rules: bool,
    /// Node limit per search.
    pub budget: u64,
    /// Try the cheap tiers before searching.
    pub pipeline: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            localize: LocalizeMode::Auto,
            binary_rules: false,
            budget: DEFAULT_BUDGET,
            pipeline: true,
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Localize(#[from] LocalizeError),
}

#[derive(Default)]
struct Stats {
    nodes: u64,
    localized: usize,
}

/// An instance prepared for answering queries. Safe to share across threads.
pub struct Solver<'a> {
    instance: &'a PrioritizedInstance,
    attacks: AttackRelation,
    grounded: GroundedResult,
    gamma_empty: FactSet,
    unconflicted: FactSet,
    options: SolverOptions,
    memo: DashMap<(FactId, RepairKind), (Verdict, u64, usize)>,
}

impl<'a> Solver<'a> {
    pub fn new(instance: &'a PrioritizedInstance, options: SolverOptions) -> Result<Self, SolverError> {
        let attacks = compute_attacks(instance);
        let grounded = grounded_repair(instance, &attacks)?;
        let gamma_empty = grounded.gamma_empty(instance);
        Ok(Self {
            instance,
            attacks,
            grounded,
            gamma_empty,
            unconflicted: instance.unconflicted(),
            options,
            memo: DashMap::new(),
        })
    }

    pub fn instance(&self) -> &PrioritizedInstance {
        self.instance
    }

    pub fn attacks(&self) -> &AttackRelation {
        &self.attacks
    }

    pub fn grounded(&self) -> &GroundedResult {
        &self.grounded
    }

    pub fn gamma_empty(&self) -> &FactSet {
        &self.gamma_empty
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    /// Decides `answer` under `semantics`, through the tiers when the
    /// pipeline is enabled.
    pub fn decide(&self, answer: &AnswerCauses, semantics: Semantics) -> Result<Decision, SolverError> {
        let start = Instant::now();
        let mut stats = Stats::default();
        let (verdict, tier) = if self.options.pipeline {
            self.pipeline(answer, semantics, &mut stats)?
        } else {
            self.direct(answer, semantics, &mut stats)?
        };
        Ok(Decision {
            answer_id: answer.answer_id.clone(),
            semantics,
            verdict,
            tier,
            localized_facts: stats.localized,
            search_nodes: stats.nodes,
            elapsed_ms: start.elapsed().as_secs_f64() * 1000.0,
        })
    }

    /// Decides every (answer, semantics) pair on the current rayon pool.
    /// Results come back in input order, answers outermost.
    pub fn decide_batch(
        &self,
        answers: &[AnswerCauses],
        semantics: &[Semantics],
    ) -> Result<Vec<Decision>, SolverError> {
        let tasks: Vec<(usize, usize)> = (0..answers.len())
            .flat_map(|a| (0..semantics.len()).map(move |s| (a, s)))
            .collect();
        tasks
            .par_iter()
            .map(|&(a, s)| self.decide(&answers[a], semantics[s]))
            .collect()
    }

    fn pipeline(
        &self,
        answer: &AnswerCauses,
        semantics: Semantics,
        stats: &mut Stats,
    ) -> Result<(Verdict, Tier), SolverError> {
        let Some(kind) = semantics.kind() else {
            return self.direct(answer, semantics, stats);
        };
        if kind == RepairKind::S {
            if answer.holds_in(&self.unconflicted) {
                return Ok((Verdict::Yes, Tier::Trivial));
            }
            return self.direct(answer, semantics, stats);
        }
        if answer.holds_in(&self.gamma_empty) {
            return Ok((Verdict::Yes, Tier::Trivial));
        }
        if answer.holds_in(&self.grounded.grounded) {
            return Ok((Verdict::Yes, Tier::Grounded));
        }
        if kind == RepairKind::G {
            use RepairKind::P;
            let bound = match semantics {
                Semantics::Ar(_) => {
                    if self.direct_ar(answer, P, stats)? == Verdict::Yes {
                        Some(Verdict::Yes)
                    } else if self.direct_brave(answer, P, stats)? == Verdict::No {
                        Some(Verdict::No)
                    } else {
                        None
                    }
                }
                Semantics::Brave(_) => {
                    if self.direct_brave(answer, P, stats)? == Verdict::No {
                        Some(Verdict::No)
                    } else if self.direct_ar(answer, P, stats)? == Verdict::Yes {
                        Some(Verdict::Yes)
                    } else {
                        None
                    }
                }
                Semantics::Iar(_) => {
                    if self.direct_iar(answer, P, stats)? == Verdict::Yes {
                        Some(Verdict::Yes)
                    } else if self.direct_brave(answer, P, stats)? == Verdict::No {
                        Some(Verdict::No)
                    } else {
                        None
                    }
                }
                _ => None,
            };
            if let Some(v) = bound {
                return Ok((v, Tier::ParetoBound));
            }
        }
        self.direct(answer, semantics, stats)
    }

    /// Decides without the shortcut tiers. Grounded and trivially P-IAR are
    /// reported at their own tier.
    pub fn decide_direct(&self, answer: &AnswerCauses, semantics: Semantics) -> Result<Decision, SolverError> {
        let start = Instant::now();
        let mut stats = Stats::default();
        let (verdict, tier) = self.direct(answer, semantics, &mut stats)?;
        Ok(Decision {
            answer_id: answer.answer_id.clone(),
            semantics,
            verdict,
            tier,
            localized_facts: stats.localized,
            search_nodes: stats.nodes,
            elapsed_ms: start.elapsed().as_secs_f64() * 1000.0,
        })
    }

    fn direct(
        &self,
        answer: &AnswerCauses,
        semantics: Semantics,
        stats: &mut Stats,
    ) -> Result<(Verdict, Tier), SolverError> {
        let verdict = match semantics {
            Semantics::TrivialPiar => return Ok((Verdict::from_bool(answer.holds_in(&self.gamma_empty)), Tier::Trivial)),
            Semantics::Grounded => {
                if answer.holds_in(&self.gamma_empty) {
                    return Ok((Verdict::Yes, Tier::Trivial));
                }
                return Ok((Verdict::from_bool(answer.holds_in(&self.grounded.grounded)), Tier::Grounded));
            }
            Semantics::Brave(kind) => self.direct_brave(answer, kind, stats)?,
            Semantics::Ar(kind) => self.direct_ar(answer, kind, stats)?,
            Semantics::Iar(kind) => self.direct_iar(answer, kind, stats)?,
        };
        Ok((verdict, Tier::Direct))
    }

    fn reach_mode(&self, kind: RepairKind) -> Result<Option<ReachMode>, SolverError> {
        if self.options.localize == LocalizeMode::Strong {
            let reason = match kind {
                RepairKind::G => Some("strong reachability is not known to preserve globally-optimal repairs"),
                RepairKind::C => Some("strong reachability does not preserve completion-optimal repairs"),
                _ => None,
            };
            if let Some(reason) = reason {
                return Err(LocalizeError::ModeMismatch {
                    mode: ReachMode::Strong,
                    reason,
                }
                .into());
            }
        }
        Ok(match self.options.localize {
            LocalizeMode::Off => None,
            _ if self.options.binary_rules && self.instance.is_binary() => Some(ReachMode::BinaryGraph),
            LocalizeMode::Strong => Some(ReachMode::Strong),
            LocalizeMode::Weak => Some(ReachMode::Weak),
            LocalizeMode::Auto if kind == RepairKind::P => Some(ReachMode::Strong),
            LocalizeMode::Auto => Some(ReachMode::Weak),
        })
    }

    /// The instance to search for `answer`, with its attacks and the answer
    /// translated onto it.
    #[allow(clippy::type_complexity)]
    fn scope(
        &self,
        answer: &AnswerCauses,
        kind: RepairKind,
        stats: &mut Stats,
    ) -> Result<(Cow<'_, PrioritizedInstance>, Cow<'_, AttackRelation>, Vec<FactSet>), SolverError> {
        let mode = self.reach_mode(kind)?;
        let seed = answer.cause_union();
        let keep = match (mode, kind) {
            (None, _) => None,
            (Some(_), RepairKind::S) => Some(reach_components(self.instance, &seed)),
            (Some(mode), _) => Some(reach(self.instance, &seed, mode)?),
        };
        let out = match keep {
            None => (
                Cow::Borrowed(self.instance),
                Cow::Borrowed(&self.attacks),
                answer.causes.iter().map(|c| c.facts.clone()).collect(),
            ),
            Some(keep) => {
                let sub = restrict(self.instance, &keep);
                let attacks = compute_attacks(&sub);
                let causes = answer
                    .causes
                    .iter()
                    .map(|c| self.instance.translate_to(&c.facts, &sub))
                    .collect();
                (Cow::Owned(sub), Cow::Owned(attacks), causes)
            }
        };
        stats.localized = stats.localized.max(out.0.num_facts());
        Ok(out)
    }

    fn binary(&self) -> bool {
        self.options.binary_rules && self.instance.is_binary()
    }

    fn direct_brave(&self, answer: &AnswerCauses, kind: RepairKind, stats: &mut Stats) -> Result<Verdict, SolverError> {
        let (inst, attacks, mut causes) = self.scope(answer, kind, stats)?;
        causes.sort_by_key(|c| c.len());
        let budget = Budget::new(self.options.budget);
        let mut verdict = Verdict::No;
        for cause in &causes {
            match find_optimal_repair(&inst, &attacks, kind, Goal::Contain(cause), self.binary(), &budget) {
                Ok(Some(_)) => {
                    verdict = Verdict::Yes;
                    break;
                }
                Ok(None) => {}
                Err(OptimalityError::SearchBudgetExceeded(_)) => {
                    verdict = Verdict::Unknown;
                    break;
                }
                Err(e) => unreachable!("search raised {e}"),
            }
        }
        stats.nodes += budget.used();
        Ok(verdict)
    }

    fn direct_ar(&self, answer: &AnswerCauses, kind: RepairKind, stats: &mut Stats) -> Result<Verdict, SolverError> {
        let (inst, attacks, causes) = self.scope(answer, kind, stats)?;
        let budget = Budget::new(self.options.budget);
        let verdict = match find_optimal_repair(&inst, &attacks, kind, Goal::AvoidAll(&causes), self.binary(), &budget) {
            Ok(Some(_)) => Verdict::No,
            Ok(None) => Verdict::Yes,
            Err(_) => Verdict::Unknown,
        };
        stats.nodes += budget.used();
        Ok(verdict)
    }

    /// Whether `fact` belongs to every `kind`-optimal repair, memoized.
    fn in_intersection(&self, fact: FactId, kind: RepairKind, stats: &mut Stats) -> Result<Verdict, SolverError> {
        if !self.instance.is_conflicting(fact) {
            return Ok(Verdict::Yes);
        }
        if self.options.pipeline && kind != RepairKind::S && self.grounded.grounded.contains(fact) {
            return Ok(Verdict::Yes);
        }
        if let Some(hit) = self.memo.get(&(fact, kind)) {
            let (v, _, localized) = *hit;
            stats.localized = stats.localized.max(localized);
            return Ok(v);
        }
        let mut own = Stats::default();
        let v = self.direct_ar(&AnswerCauses::singleton(self.instance, fact), kind, &mut own)?;
        self.memo.insert((fact, kind), (v, own.nodes, own.localized));
        stats.nodes += own.nodes;
        stats.localized = stats.localized.max(own.localized);
        Ok(v)
    }

    fn direct_iar(&self, answer: &AnswerCauses, kind: RepairKind, stats: &mut Stats) -> Result<Verdict, SolverError> {
        let mut causes: Vec<&FactSet> = answer.causes.iter().map(|c| &c.facts).collect();
        causes.sort_by_key(|c| c.len());
        let mut unknown = false;
        for cause in causes {
            let mut all_in = true;
            let mut cause_unknown = false;
            for f in cause.iter() {
                match self.in_intersection(f, kind, stats)? {
                    Verdict::Yes => {}
                    Verdict::No => {
                        all_in = false;
                        break;
                    }
                    Verdict::Unknown => cause_unknown = true,
                }
            }
            if all_in && !cause_unknown {
                return Ok(Verdict::Yes);
            }
            unknown |= all_in && cause_unknown;
        }
        Ok(if unknown { Verdict::Unknown } else { Verdict::No })
    }
}

/// Checks the implications that must hold between verdicts on one answer:
/// IAR ⇒ AR ⇒ brave per kind, AR monotone along P, G, C and brave monotone
/// along C, G, P. Unknown verdicts are skipped. Returns one message per
/// violation.
pub fn chain_violations(decisions: &[Decision]) -> Vec<String> {
    use std::collections::HashMap;
    let mut by_answer: HashMap<&str, HashMap<Semantics, Verdict>> = HashMap::new();
    for d in decisions {
        by_answer
            .entry(d.answer_id.as_str())
            .or_default()
            .insert(d.semantics, d.verdict);
    }
    let mut out = Vec::new();
    let mut answers: Vec<_> = by_answer.keys().copied().collect();
    answers.sort();
    for answer in answers {
        let v = &by_answer[answer];
        let mut implies = |a: Semantics, b: Semantics| {
            if v.get(&a) == Some(&Verdict::Yes) && v.get(&b) == Some(&Verdict::No) {
                out.push(format!("{answer}: {a} holds but {b} does not"));
            }
        };
        for kind in RepairKind::ALL {
            implies(Semantics::Iar(kind), Semantics::Ar(kind));
            implies(Semantics::Ar(kind), Semantics::Brave(kind));
        }
        use RepairKind::{C, G, P};
        implies(Semantics::Ar(P), Semantics::Ar(G));
        implies(Semantics::Ar(G), Semantics::Ar(C));
        implies(Semantics::Iar(P), Semantics::Iar(G));
        implies(Semantics::Iar(G), Semantics::Iar(C));
        implies(Semantics::Brave(C), Semantics::Brave(G));
        implies(Semantics::Brave(G), Semantics::Brave(P));
        implies(Semantics::TrivialPiar, Semantics::Grounded);
        for kind in RepairKind::PRIORITIZED {
            implies(Semantics::Grounded, Semantics::Iar(kind));
        }
    }
    out
}

/// One CSV row per decision, with a header.
pub fn decisions_to_csv(decisions: &[Decision]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for d in decisions {
        w.serialize(d).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

/// One JSON object per line.
pub fn decisions_to_json_lines(decisions: &[Decision]) -> String {
    let mut out = String::new();
    for d in decisions {
        out.push_str(&serde_json::to_string(d).expect("decision serializes"));
        out.push('\n');
    }
    out
}
