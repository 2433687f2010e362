use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::stats::{instance_stats, StatsTable};
use crate::model::{AnswerCauses, PrioritizedInstance};
use crate::solver::{Semantics, Solver, SolverOptions, Tier, Verdict};

pub struct SuiteInstance {
    pub label: String,
    pub instance: PrioritizedInstance,
    pub answers: Vec<AnswerCauses>,
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub semantics: Vec<Semantics>,
    pub options: SolverOptions,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Add the optimal-repair intersection columns where the instance is
    /// small enough.
    pub oracle_stats: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            semantics: Semantics::default_grid(),
            options: SolverOptions::default(),
            jobs: None,
            oracle_stats: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub instance: String,
    pub answer_id: String,
    pub semantics: Semantics,
    pub verdict: Verdict,
    pub tier: Tier,
    pub elapsed_ms: f64,
    pub nodes: u64,
    pub localized_facts: usize,
    pub timeout: bool,
    /// Empty unless the decision failed.
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TierCounts {
    pub trivial: usize,
    pub grounded: usize,
    pub pareto_bound: usize,
    pub direct: usize,
    pub yes: usize,
    pub no: usize,
    pub unknown: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteSummary {
    /// Keyed by semantics name.
    pub tiers: BTreeMap<String, TierCounts>,
    pub stats: Vec<StatsTable>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteResult {
    pub records: Vec<RunRecord>,
    pub summary: SuiteSummary,
}

/// Decides every answer of every instance under every configured semantics.
/// Failures are recorded, never propagated. Records come out ordered by
/// instance, answer, then semantics.
pub fn run_suite(instances: &[SuiteInstance], config: &SuiteConfig) -> SuiteResult {
    let run = || {
        let mut result = SuiteResult::default();
        for item in instances {
            run_instance(item, config, &mut result);
        }
        result
    };
    match config.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(run))
            .unwrap_or_else(|_| run()),
        None => run(),
    }
}

fn run_instance(item: &SuiteInstance, config: &SuiteConfig, result: &mut SuiteResult) {
    let solver = match Solver::new(&item.instance, config.options) {
        Ok(s) => s,
        Err(e) => {
            for answer in &item.answers {
                for &semantics in &config.semantics {
                    result.records.push(failed(item, answer, semantics, e.to_string()));
                }
            }
            return;
        }
    };
    let stats = instance_stats(&item.label, &item.instance, solver.grounded(), config.oracle_stats)
        .or_else(|_| instance_stats(&item.label, &item.instance, solver.grounded(), false))
        .expect("stats without oracle cannot fail");
    result.summary.stats.push(stats);

    let tasks: Vec<(&AnswerCauses, Semantics)> = item
        .answers
        .iter()
        .flat_map(|a| config.semantics.iter().map(move |&s| (a, s)))
        .collect();
    let records: Vec<RunRecord> = tasks
        .par_iter()
        .map(|&(answer, semantics)| match solver.decide(answer, semantics) {
            Ok(d) => RunRecord {
                instance: item.label.clone(),
                answer_id: d.answer_id,
                semantics,
                verdict: d.verdict,
                tier: d.tier,
                elapsed_ms: d.elapsed_ms,
                nodes: d.search_nodes,
                localized_facts: d.localized_facts,
                timeout: d.verdict == Verdict::Unknown,
                error: String::new(),
            },
            Err(e) => failed(item, answer, semantics, e.to_string()),
        })
        .collect();
    for r in &records {
        let counts = result.summary.tiers.entry(r.semantics.to_string()).or_default();
        if r.error.is_empty() {
            match r.tier {
                Tier::Trivial => counts.trivial += 1,
                Tier::Grounded => counts.grounded += 1,
                Tier::ParetoBound => counts.pareto_bound += 1,
                Tier::Direct => counts.direct += 1,
            }
        }
        match r.verdict {
            Verdict::Yes => counts.yes += 1,
            Verdict::No => counts.no += 1,
            Verdict::Unknown => counts.unknown += 1,
        }
    }
    result.records.extend(records);
}

fn failed(item: &SuiteInstance, answer: &AnswerCauses, semantics: Semantics, error: String) -> RunRecord {
    RunRecord {
        instance: item.label.clone(),
        answer_id: answer.answer_id.clone(),
        semantics,
        verdict: Verdict::Unknown,
        tier: Tier::Direct,
        elapsed_ms: 0.0,
        nodes: 0,
        localized_facts: 0,
        timeout: false,
        error,
    }
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

pub fn records_to_csv(records: &[RunRecord]) -> String {
    to_csv(records)
}

/// One row per semantics with decision counts per tier and verdict.
pub fn tier_table_csv(summary: &SuiteSummary) -> String {
    let mut out = String::from("semantics,trivial,grounded,pareto_bound,direct,yes,no,unknown\n");
    for (s, c) in &summary.tiers {
        out.push_str(&format!(
            "{s},{},{},{},{},{},{},{}\n",
            c.trivial, c.grounded, c.pareto_bound, c.direct, c.yes, c.no, c.unknown
        ));
    }
    out
}

pub fn stats_to_csv(stats: &[StatsTable]) -> String {
    let mut out = String::from(StatsTable::CSV_HEADER);
    out.push('\n');
    for s in stats {
        out.push_str(&s.csv_row());
        out.push('\n');
    }
    out
}

/// Resolved decisions per semantics sorted by time, with their rank, for
/// cactus plots.
pub fn cactus_csv(records: &[RunRecord]) -> String {
    let mut by: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.verdict != Verdict::Unknown) {
        by.entry(r.semantics.to_string()).or_default().push(r.elapsed_ms);
    }
    let mut out = String::from("semantics,solved,elapsed_ms\n");
    for (s, mut times) in by {
        times.sort_by(f64::total_cmp);
        for (i, t) in times.iter().enumerate() {
            out.push_str(&format!("{s},{},{t:.3}\n", i + 1));
        }
    }
    out
}
