//! Synthetic instances, batch runs and the tables computed from them.

mod gen;
mod stats;
mod suite;

pub use gen::{gen_instance, GenParams, ParamError, PrioMode};
pub use stats::{instance_stats, StatsTable};
pub use suite::{
    cactus_csv, records_to_csv, run_suite, stats_to_csv, tier_table_csv, RunRecord, SuiteConfig, SuiteInstance,
    SuiteResult, SuiteSummary, TierCounts,
};
