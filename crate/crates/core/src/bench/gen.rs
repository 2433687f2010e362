//! Seeded synthetic instances.
//!
//! A fixed share of the facts is chosen to be conflicting, then covered by
//! random binary conflicts (and optionally larger ones) until the conflict
//! count is reached. Priorities come from fact scores, from random
//! orientation of conflict pairs, or from a ranking of fact groups.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::factset::{FactId, FactSet};
use crate::model::{validate, AnswerCauses, Cause, Conflict, PrioritizedInstance, ValidationMode};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PrioMode {
    /// No priority at all.
    Empty,
    /// Each fact gets a level in `0..levels`; higher levels are preferred.
    ScoreStructured { levels: u32 },
    /// Each co-conflicting pair is oriented with probability `orient_prob`,
    /// in a random direction that keeps the relation acyclic.
    NonScore { orient_prob: f64 },
    /// Facts fall into `groups` groups under a random ranking. About 90% of
    /// co-conflicting pairs are oriented: across groups by rank, within a
    /// group at random.
    RuleLike { groups: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n_facts: usize,
    /// Share of facts in at least one conflict, in (0, 1].
    pub conflict_ratio: f64,
    /// Total number of conflicts; defaults to the number of conflicting facts.
    pub n_conflicts: Option<usize>,
    pub binary: bool,
    /// Conflicts of size `nonbinary_size` among the ones above; requires
    /// `binary` to be false.
    pub nonbinary_count: usize,
    pub nonbinary_size: usize,
    pub prio: PrioMode,
    pub n_answers: usize,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            n_facts: 100,
            conflict_ratio: 0.2,
            n_conflicts: None,
            binary: true,
            nonbinary_count: 0,
            nonbinary_size: 3,
            prio: PrioMode::ScoreStructured { levels: 5 },
            n_answers: 10,
            seed: 0,
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ParamError {
    #[error("{0}")]
    Invalid(String),
    #[error("could not place {wanted} conflicts of size {size}: only {placed} fit")]
    Unplaceable { wanted: usize, size: usize, placed: usize },
    #[error("generated instance failed validation: {0}")]
    Validation(String),
}

impl GenParams {
    fn check(&self) -> Result<(), ParamError> {
        let bad = |m: String| Err(ParamError::Invalid(m));
        if !(self.conflict_ratio > 0.0 && self.conflict_ratio <= 1.0) {
            return bad(format!("conflict_ratio must be in (0, 1], got {}", self.conflict_ratio));
        }
        if self.binary && self.nonbinary_count > 0 {
            return bad("nonbinary_count must be 0 for binary instances".into());
        }
        if self.nonbinary_count > 0 && self.nonbinary_size < 3 {
            return bad(format!("nonbinary_size must be at least 3, got {}", self.nonbinary_size));
        }
        match self.prio {
            PrioMode::ScoreStructured { levels: 0 } => bad("levels must be at least 1".into()),
            PrioMode::RuleLike { groups: 0 } => bad("groups must be at least 1".into()),
            PrioMode::NonScore { orient_prob } if !(0.0..=1.0).contains(&orient_prob) => {
                bad(format!("orient_prob must be in [0, 1], got {orient_prob}"))
            }
            _ => Ok(()),
        }
    }

    pub fn conflicting_count(&self) -> usize {
        ((self.n_facts as f64 * self.conflict_ratio).round() as usize).min(self.n_facts)
    }
}

/// Generates an instance and its answers. Equal parameters give equal
/// output.
pub fn gen_instance(params: &GenParams) -> Result<(PrioritizedInstance, Vec<AnswerCauses>), ParamError> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n_facts;
    let m = params.conflicting_count();
    if m < 2 {
        return Err(ParamError::Invalid(format!(
            "{n} facts at ratio {} leave fewer than two conflicting facts",
            params.conflict_ratio
        )));
    }
    let mut pool: Vec<u32> = (0..n as u32).collect();
    pool.shuffle(&mut rng);
    let mut chosen: Vec<u32> = pool[..m].to_vec();
    chosen.sort_unstable();

    let cover = m.div_ceil(2);
    let target = params.n_conflicts.unwrap_or(m);
    let max_edges = m * (m - 1) / 2;
    let target_edges = target.saturating_sub(params.nonbinary_count);
    if target_edges < cover || target_edges > max_edges {
        return Err(ParamError::Invalid(format!(
            "{target} conflicts over {m} conflicting facts: binary part must be within {cover}..={max_edges}"
        )));
    }

    let mut edges: HashSet<(u32, u32)> = HashSet::with_capacity(target_edges);
    let mut members: Vec<Vec<u32>> = Vec::with_capacity(target);
    let add_edge = |a: u32, b: u32, edges: &mut HashSet<(u32, u32)>, members: &mut Vec<Vec<u32>>| {
        let e = (a.min(b), a.max(b));
        if a != b && edges.insert(e) {
            members.push(vec![e.0, e.1]);
        }
    };
    let mut order = chosen.clone();
    order.shuffle(&mut rng);
    for pair in order.chunks(2) {
        let b = if pair.len() == 2 { pair[1] } else { order[0] };
        add_edge(pair[0], b, &mut edges, &mut members);
    }
    while members.len() < target_edges {
        let a = chosen[rng.gen_range(0..m)];
        let b = chosen[rng.gen_range(0..m)];
        add_edge(a, b, &mut edges, &mut members);
    }

    let size = params.nonbinary_size;
    if params.nonbinary_count > 0 {
        let mut placed: Vec<Vec<u32>> = Vec::new();
        let mut tries = 0;
        while placed.len() < params.nonbinary_count {
            tries += 1;
            if tries > 1000 * params.nonbinary_count + 1000 || size > m {
                return Err(ParamError::Unplaceable {
                    wanted: params.nonbinary_count,
                    size,
                    placed: placed.len(),
                });
            }
            let mut c: Vec<u32> = chosen.choose_multiple(&mut rng, size).copied().collect();
            c.sort_unstable();
            let has_edge = (0..size).any(|i| (i + 1..size).any(|j| edges.contains(&(c[i], c[j]))));
            let nested = placed.iter().any(|p| {
                let (small, big) = if p.len() <= c.len() { (p, &c) } else { (&c, p) };
                small.iter().all(|x| big.binary_search(x).is_ok())
            });
            if !has_edge && !nested {
                placed.push(c);
            }
        }
        members.extend(placed);
    }

    let names: Vec<String> = (0..n).map(|i| format!("f{i}")).collect();
    let conflicts: Vec<Conflict> = members
        .iter()
        .enumerate()
        .map(|(i, c)| Conflict::new(format!("c{}", i + 1), c.iter().map(|&f| FactId(f)).collect()))
        .collect();
    let prefs = gen_prefs(&members, n, params.prio, &mut rng);
    let instance = PrioritizedInstance::from_parts(names, conflicts, prefs);
    let answers = gen_answers(&instance, params.n_answers, &mut rng);

    let checked = validate(&instance, &answers, ValidationMode::Strict)
        .map_err(|e| ParamError::Validation(e.to_string()))?;
    Ok((instance, checked.answers))
}

fn gen_prefs(members: &[Vec<u32>], n: usize, mode: PrioMode, rng: &mut ChaCha8Rng) -> Vec<(FactId, FactId)> {
    let mut prefs = Vec::new();
    let mut seen: HashSet<(u32, u32)> = HashSet::new();
    let pairs = members.iter().flat_map(|c| {
        (0..c.len()).flat_map(move |i| (i + 1..c.len()).map(move |j| (c[i], c[j])))
    });
    match mode {
        PrioMode::Empty => {}
        PrioMode::ScoreStructured { levels } => {
            let level: Vec<u32> = (0..n).map(|_| rng.gen_range(0..levels)).collect();
            for (a, b) in pairs {
                if !seen.insert((a, b)) {
                    continue;
                }
                match level[a as usize].cmp(&level[b as usize]) {
                    std::cmp::Ordering::Greater => prefs.push((FactId(a), FactId(b))),
                    std::cmp::Ordering::Less => prefs.push((FactId(b), FactId(a))),
                    std::cmp::Ordering::Equal => {}
                }
            }
        }
        PrioMode::NonScore { orient_prob } => {
            let mut dag = Dag::new(n);
            for (a, b) in pairs {
                if !seen.insert((a, b)) || !rng.gen_bool(orient_prob) {
                    continue;
                }
                let (x, y) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
                prefs.push(dag.orient(x, y));
            }
        }
        PrioMode::RuleLike { groups } => {
            let group: Vec<u32> = (0..n).map(|_| rng.gen_range(0..groups)).collect();
            let mut rank: Vec<u32> = (0..groups).collect();
            rank.shuffle(rng);
            let mut dag = Dag::new(n);
            for (a, b) in pairs {
                if !seen.insert((a, b)) || !rng.gen_bool(0.9) {
                    continue;
                }
                let (ra, rb) = (rank[group[a as usize] as usize], rank[group[b as usize] as usize]);
                let (x, y) = match ra.cmp(&rb) {
                    std::cmp::Ordering::Greater => (a, b),
                    std::cmp::Ordering::Less => (b, a),
                    std::cmp::Ordering::Equal if rng.gen_bool(0.5) => (a, b),
                    std::cmp::Ordering::Equal => (b, a),
                };
                prefs.push(dag.orient(x, y));
            }
        }
    }
    prefs
}

/// Priority graph kept acyclic as edges are added.
struct Dag {
    out: Vec<Vec<u32>>,
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<u32>,
}

impl Dag {
    fn new(n: usize) -> Self {
        Self {
            out: vec![Vec::new(); n],
            stamp: vec![0; n],
            epoch: 0,
            stack: Vec::new(),
        }
    }

    fn reaches(&mut self, from: u32, to: u32) -> bool {
        self.epoch += 1;
        self.stack.clear();
        self.stack.push(from);
        self.stamp[from as usize] = self.epoch;
        while let Some(u) = self.stack.pop() {
            if u == to {
                return true;
            }
            for &v in &self.out[u as usize] {
                if self.stamp[v as usize] != self.epoch {
                    self.stamp[v as usize] = self.epoch;
                    self.stack.push(v);
                }
            }
        }
        false
    }

    /// Adds `x ≻ y`, or `y ≻ x` if the former would close a cycle. One of
    /// the two is always possible in an acyclic graph.
    fn orient(&mut self, x: u32, y: u32) -> (FactId, FactId) {
        let (x, y) = if self.reaches(y, x) { (y, x) } else { (x, y) };
        self.out[x as usize].push(y);
        (FactId(x), FactId(y))
    }
}

/// Answers with one to three consistent causes of one to three facts each.
fn gen_answers(instance: &PrioritizedInstance, count: usize, rng: &mut ChaCha8Rng) -> Vec<AnswerCauses> {
    let n = instance.num_facts();
    let mut out = Vec::with_capacity(count);
    for q in 0..count {
        let mut causes: Vec<FactSet> = Vec::new();
        let wanted = rng.gen_range(1..=3);
        for _ in 0..wanted {
            for _ in 0..100 {
                let size = rng.gen_range(1..=3usize).min(n);
                let set: FactSet = rand::seq::index::sample(rng, n, size)
                    .into_iter()
                    .map(FactId::from)
                    .collect();
                if instance.is_consistent(&set) {
                    causes.push(set);
                    break;
                }
            }
        }
        causes.sort_by_key(|c| c.len());
        let mut minimal: Vec<FactSet> = Vec::new();
        for c in causes {
            if !minimal.iter().any(|m| m.is_subset(&c)) {
                minimal.push(c);
            }
        }
        let mut answer = AnswerCauses::new(format!("q{q}"));
        answer.causes = minimal
            .into_iter()
            .enumerate()
            .map(|(i, facts)| Cause {
                label: format!("k{}", i + 1),
                facts,
            })
            .collect();
        out.push(answer);
    }
    out
}
