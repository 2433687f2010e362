use serde::Serialize;

use crate::attack::GroundedResult;
use crate::model::PrioritizedInstance;
use crate::optimality::oracle::Oracle;
use crate::optimality::{Budget, OptimalityError, RepairKind};

/// Sizes of the parts of an instance and of its grounded repair.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StatsTable {
    pub label: String,
    /// All facts, including self-inconsistent ones removed on load.
    pub facts: usize,
    pub conflicting_facts: usize,
    pub conflicts: usize,
    /// The intersection of the subset repairs: the unconflicted facts.
    pub s_intersection: usize,
    /// Facts added by each Γ step; the first entry is Γ(∅) minus the
    /// unconflicted facts.
    pub step_deltas: Vec<usize>,
    pub grounded: usize,
    /// ⋂PRep ∖ G, ⋂GRep ∖ ⋂PRep, ⋂CRep ∖ ⋂GRep; only with the oracle.
    pub p_minus_grounded: Option<usize>,
    pub g_minus_p: Option<usize>,
    pub c_minus_g: Option<usize>,
}

impl StatsTable {
    pub fn gamma_empty_minus_s(&self) -> usize {
        self.step_deltas.first().copied().unwrap_or(0)
    }

    pub const CSV_HEADER: &'static str = "label,facts,conflicting_facts,conflicts,s_intersection,gamma_empty_minus_s,steps,step_deltas,grounded,p_minus_grounded,g_minus_p,c_minus_g";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let deltas: Vec<String> = self.step_deltas.iter().map(|d| d.to_string()).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            self.label.clone(),
            self.facts.to_string(),
            self.conflicting_facts.to_string(),
            self.conflicts.to_string(),
            self.s_intersection.to_string(),
            self.gamma_empty_minus_s().to_string(),
            self.step_deltas.len().to_string(),
            deltas.join(" "),
            self.grounded.to_string(),
            opt(self.p_minus_grounded),
            opt(self.g_minus_p),
            opt(self.c_minus_g),
        ])
        .expect("in-memory CSV write");
        let bytes = w.into_inner().expect("in-memory CSV flush");
        String::from_utf8(bytes).expect("CSV is UTF-8").trim_end().to_string()
    }
}

/// Computes the table; `oracle` adds the optimal-repair intersection
/// columns, which needs a small instance.
pub fn instance_stats(
    label: &str,
    instance: &PrioritizedInstance,
    grounded: &GroundedResult,
    oracle: bool,
) -> Result<StatsTable, OptimalityError> {
    let unconflicted = instance.unconflicted().len();
    let mut table = StatsTable {
        label: label.to_string(),
        facts: instance.num_facts() + instance.removed_facts().len(),
        conflicting_facts: instance.conflicting().len(),
        conflicts: instance.conflicts().len(),
        s_intersection: unconflicted,
        step_deltas: grounded.steps.iter().map(|s| s.len()).collect(),
        grounded: grounded.grounded.len(),
        ..Default::default()
    };
    if table.step_deltas.iter().all(|&d| d == 0) {
        table.step_deltas.clear();
    }
    if oracle {
        let o = Oracle::new(instance)?;
        let budget = Budget::unlimited();
        let p = o.intersection(RepairKind::P, &budget)?;
        let g = o.intersection(RepairKind::G, &budget)?;
        let c = o.intersection(RepairKind::C, &budget)?;
        table.p_minus_grounded = Some(p.difference(&grounded.grounded).len());
        table.g_minus_p = Some(g.difference(&p).len());
        table.c_minus_g = Some(c.difference(&g).len());
    }
    Ok(table)
}
