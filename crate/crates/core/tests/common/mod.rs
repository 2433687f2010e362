//! Small random instances for comparing against the exhaustive oracle.
#![allow(dead_code)]

use optrep::optimality::oracle::Oracle;
use optrep::optimality::Budget;
use optrep::solver::{Semantics, Verdict};
use optrep::{validate, AnswerCauses, Cause, Conflict, FactId, FactSet, PrioritizedInstance, ValidationMode};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Binary,
    /// Conflicts of size 2 to 4.
    NonBinary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prio {
    Empty,
    Score,
    NonScore,
}

pub const SHAPES: [Shape; 2] = [Shape::Binary, Shape::NonBinary];
pub const PRIOS: [Prio; 3] = [Prio::Empty, Prio::Score, Prio::NonScore];

pub struct Case {
    pub instance: PrioritizedInstance,
    pub answers: Vec<AnswerCauses>,
}

/// At most 12 conflicting facts, at most 8 conflicts, up to two
/// unconflicted facts. Every fact is asked as a singleton answer, plus three
/// random answers.
pub fn random_case(seed: u64, shape: Shape, prio: Prio) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000);
    let pool = rng.gen_range(2..=12u32);
    let wanted = rng.gen_range(1..=8usize);
    let mut conflicts: Vec<Vec<u32>> = Vec::new();
    for _ in 0..200 {
        if conflicts.len() == wanted {
            break;
        }
        let max = match shape {
            Shape::Binary => 2,
            Shape::NonBinary => 4,
        };
        let size = rng.gen_range(2..=max).min(pool as usize);
        let mut c: Vec<u32> = rand::seq::index::sample(&mut rng, pool as usize, size)
            .into_iter()
            .map(|x| x as u32)
            .collect();
        c.sort_unstable();
        let nested = conflicts.iter().any(|o| {
            let (s, b) = if o.len() <= c.len() { (o, &c) } else { (&c, o) };
            s.iter().all(|x| b.contains(x))
        });
        if !nested {
            conflicts.push(c);
        }
    }
    let n = pool + rng.gen_range(0..=2);
    let names: Vec<String> = (0..n).map(|i| format!("f{i}")).collect();

    let mut prefs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let level: Vec<u32> = (0..n).map(|_| rng.gen_range(0..4)).collect();
    let mut rank: Vec<u32> = (0..n).collect();
    rank.shuffle(&mut rng);
    for c in &conflicts {
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                let (a, b) = (c[i], c[j]);
                if !seen.insert((a, b)) {
                    continue;
                }
                let edge = match prio {
                    Prio::Empty => None,
                    Prio::Score => match level[a as usize].cmp(&level[b as usize]) {
                        std::cmp::Ordering::Greater => Some((a, b)),
                        std::cmp::Ordering::Less => Some((b, a)),
                        std::cmp::Ordering::Equal => None,
                    },
                    Prio::NonScore if rng.gen_bool(0.7) => {
                        if rank[a as usize] > rank[b as usize] {
                            Some((a, b))
                        } else {
                            Some((b, a))
                        }
                    }
                    Prio::NonScore => None,
                };
                if let Some((x, y)) = edge {
                    prefs.push((FactId(x), FactId(y)));
                }
            }
        }
    }
    let conflicts: Vec<Conflict> = conflicts
        .iter()
        .enumerate()
        .map(|(i, c)| Conflict::new(format!("c{i}"), c.iter().map(|&f| FactId(f)).collect()))
        .collect();
    let instance = PrioritizedInstance::from_parts(names, conflicts, prefs);

    let mut answers: Vec<AnswerCauses> = instance.facts().map(|f| AnswerCauses::singleton(&instance, f)).collect();
    for q in 0..3 {
        let mut causes: Vec<FactSet> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let size = rng.gen_range(1..=3usize).min(n as usize);
            let set: FactSet = rand::seq::index::sample(&mut rng, n as usize, size)
                .into_iter()
                .map(FactId::from)
                .collect();
            if instance.is_consistent(&set) && !causes.iter().any(|c| c.is_subset(&set) || set.is_subset(c)) {
                causes.push(set);
            }
        }
        if causes.is_empty() {
            continue;
        }
        let mut a = AnswerCauses::new(format!("r{q}"));
        a.causes = causes
            .into_iter()
            .enumerate()
            .map(|(i, facts)| Cause {
                label: format!("k{i}"),
                facts,
            })
            .collect();
        answers.push(a);
    }
    let v = validate(&instance, &answers, ValidationMode::Strict).expect("generated case is valid");
    Case {
        instance,
        answers: v.answers,
    }
}

/// The verdict straight from the definitions.
pub fn oracle_verdict(oracle: &Oracle, answer: &AnswerCauses, semantics: Semantics) -> Verdict {
    let budget = Budget::unlimited();
    let holds = match semantics {
        Semantics::Grounded => answer.holds_in(&oracle.grounded()),
        Semantics::TrivialPiar => answer.holds_in(&oracle.gamma_empty()),
        Semantics::Brave(k) => oracle.brave(answer, k, &budget).unwrap(),
        Semantics::Ar(k) => oracle.ar(answer, k, &budget).unwrap(),
        Semantics::Iar(k) => oracle.iar(answer, k, &budget).unwrap(),
    };
    if holds {
        Verdict::Yes
    } else {
        Verdict::No
    }
}
