//! The running example: two constants, four unary predicates, six conflicts.
//!
//! Fact `x_c` stands for `X(c)`. Conflicts come from the binary denial
//! constraints A/B, B/C, C/D and D/A; the priority is
//! A(a) ≻ B(a), C(a) ≻ D(a), A(b) ≻ B(b), B(b) ≻ C(b).

use crate::model::{AnswerCauses, InstanceBuilder, PrioritizedInstance};

pub const EXAMPLE1_CONF: &str = include_str!("../../../fixtures/example1/example1.conf.lp");
pub const EXAMPLE1_PREF: &str = include_str!("../../../fixtures/example1/example1.pref.lp");
pub const EXAMPLE1_ATOMS: &str = include_str!("../../../fixtures/example1/atoms.causes.lp");

/// The seven fact names in id order.
pub const EXAMPLE1_FACTS: [&str; 7] = ["a_a", "b_a", "c_a", "d_a", "a_b", "b_b", "c_b"];

pub fn example1() -> PrioritizedInstance {
    InstanceBuilder::new()
        .conflict("c1", ["a_a", "b_a"])
        .conflict("c2", ["b_a", "c_a"])
        .conflict("c3", ["c_a", "d_a"])
        .conflict("c4", ["d_a", "a_a"])
        .conflict("c5", ["a_b", "b_b"])
        .conflict("c6", ["b_b", "c_b"])
        .pref("a_a", "b_a")
        .pref("c_a", "d_a")
        .pref("a_b", "b_b")
        .pref("b_b", "c_b")
        .build()
}

/// The answer whose only cause is the single named fact.
///
/// Panics if the fact is unknown.
pub fn atom_answer(instance: &PrioritizedInstance, fact: &str) -> AnswerCauses {
    let id = instance
        .id_of(fact)
        .unwrap_or_else(|| panic!("unknown fact {fact}"));
    AnswerCauses::singleton(instance, id)
}
