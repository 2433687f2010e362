//! Inconsistency-tolerant query answering over prioritized fact bases.
//!
//! An instance is a set of facts, the conflicts among them (minimal
//! inconsistent subsets) and an acyclic priority relation between facts that
//! share a conflict. A query answer is given by its causes. The crate decides
//! whether an answer holds under grounded semantics and under brave, AR and
//! IAR semantics based on subset-, Pareto-, globally- and
//! completion-optimal repairs.
//!
//! ```
//! use optrep::{fixtures, solver::{Semantics, Solver, SolverOptions, Verdict}, RepairKind};
//!
//! let instance = fixtures::example1();
//! let solver = Solver::new(&instance, SolverOptions::default()).unwrap();
//! let answer = fixtures::atom_answer(&instance, "a_a");
//! let d = solver.decide(&answer, Semantics::Ar(RepairKind::G)).unwrap();
//! assert_eq!(d.verdict, Verdict::Yes);
//! let d = solver.decide(&answer, Semantics::Ar(RepairKind::P)).unwrap();
//! assert_eq!(d.verdict, Verdict::No);
//! ```

pub mod attack;
pub mod bench;
pub mod emit;
pub mod factset;
pub mod fixtures;
pub mod ingest;
pub mod localize;
pub mod model;
pub mod optimality;
pub mod solver;

pub use attack::{compute_attacks, gamma, grounded_repair, trivially_piar, AttackRelation, GroundedResult};
pub use factset::{FactId, FactSet};
pub use model::{
    holds_in, preprocess, restrict, validate, AnswerCauses, Cause, Conflict, InstanceBuilder,
    ModelError, PrioritizedInstance, ValidationMode,
};
pub use optimality::RepairKind;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/instances.md")]
    mod instances {}
    #[doc = include_str!("../../../book/src/repairs.md")]
    mod repairs {}
    #[doc = include_str!("../../../book/src/grounded.md")]
    mod grounded {}
    #[doc = include_str!("../../../book/src/semantics.md")]
    mod semantics {}
    #[doc = include_str!("../../../book/src/localization.md")]
    mod localization {}
    #[doc = include_str!("../../../book/src/encodings.md")]
    mod encodings {}
    #[doc = include_str!("../../../book/src/benchmarking.md")]
    mod benchmarking {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
