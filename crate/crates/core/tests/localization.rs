mod common;

use std::collections::BTreeSet;

use common::{random_case, Prio, Shape};
use optrep::localize::{localized_instance, reach, ReachMode};
use optrep::model::InstanceBuilder;
use optrep::optimality::oracle::Oracle;
use optrep::optimality::Budget;
use optrep::solver::{LocalizeMode, Semantics, Solver, SolverOptions};
use optrep::{AnswerCauses, PrioritizedInstance, RepairKind};
use proptest::prelude::*;

/// Restrictions of the full optimal repairs, and the optimal repairs of the
/// localized instance, both by name.
fn both_sides(
    inst: &PrioritizedInstance,
    answer: &AnswerCauses,
    mode: ReachMode,
    kind: RepairKind,
) -> (BTreeSet<Vec<String>>, BTreeSet<Vec<String>>) {
    let budget = Budget::unlimited();
    let (sub, _) = localized_instance(inst, answer, mode).unwrap();
    let full = Oracle::new(inst)
        .unwrap()
        .optimal_repairs(kind, &budget)
        .unwrap()
        .iter()
        .map(|r| sub.names_of(&inst.translate_to(r, &sub)))
        .collect();
    let local = Oracle::new(&sub)
        .unwrap()
        .optimal_repairs(kind, &budget)
        .unwrap()
        .iter()
        .map(|r| sub.names_of(r))
        .collect();
    (full, local)
}

/// f1 ≻ f8 ≻ f2 closes through c0 and c3, which strong reach from f1 never
/// enters. Locally a completion may put f2 above f1; globally it may not.
fn cycle_through_unreached() -> PrioritizedInstance {
    InstanceBuilder::new()
        .conflict("c0", ["f1", "f4", "f6", "f8"])
        .conflict("c1", ["f1", "f3"])
        .conflict("c2", ["f5", "f8", "f9"])
        .conflict("c3", ["f2", "f3", "f6", "f8"])
        .conflict("c4", ["f1", "f2", "f4", "f5"])
        .conflict("c5", ["f3", "f7"])
        .pref("f1", "f3")
        .pref("f1", "f8")
        .pref("f2", "f3")
        .pref("f4", "f2")
        .pref("f4", "f8")
        .pref("f5", "f1")
        .pref("f5", "f2")
        .pref("f5", "f4")
        .pref("f5", "f8")
        .pref("f5", "f9")
        .pref("f6", "f1")
        .pref("f6", "f2")
        .pref("f6", "f3")
        .pref("f6", "f4")
        .pref("f6", "f8")
        .pref("f7", "f3")
        .pref("f8", "f2")
        .pref("f8", "f3")
        .build()
}

#[test]
fn strong_reach_loses_completion_optimality() {
    let inst = cycle_through_unreached();
    let f1 = AnswerCauses::singleton(&inst, inst.id_of("f1").unwrap());
    let strong = reach(&inst, &f1.cause_union(), ReachMode::Strong).unwrap();
    assert_eq!(inst.names_of(&strong), ["f1", "f2", "f4", "f5"]);

    let (full, local) = both_sides(&inst, &f1, ReachMode::Strong, RepairKind::C);
    let extra: Vec<String> = ["f2", "f4", "f5"].map(String::from).to_vec();
    assert!(local.contains(&extra));
    assert!(!full.contains(&extra));

    for kind in [RepairKind::P, RepairKind::G, RepairKind::C] {
        let (full, local) = both_sides(&inst, &f1, ReachMode::Weak, kind);
        assert_eq!(full, local, "weak {kind}");
    }
    let (full, local) = both_sides(&inst, &f1, ReachMode::Strong, RepairKind::P);
    assert_eq!(full, local);
}

#[test]
fn solver_verdict_on_the_counterexample() {
    let inst = cycle_through_unreached();
    let f2 = AnswerCauses::singleton(&inst, inst.id_of("f2").unwrap());
    let oracle = Oracle::new(&inst).unwrap();
    let want = oracle.brave(&f2, RepairKind::C, &Budget::unlimited()).unwrap();
    let s = Solver::new(&inst, SolverOptions::default()).unwrap();
    let got = s.decide(&f2, Semantics::Brave(RepairKind::C)).unwrap().verdict;
    assert_eq!(got == optrep::solver::Verdict::Yes, want);
    let strong = Solver::new(
        &inst,
        SolverOptions {
            localize: LocalizeMode::Strong,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(strong.decide(&f2, Semantics::Brave(RepairKind::C)).is_err());
}

fn shape() -> impl Strategy<Value = Shape> {
    prop_oneof![Just(Shape::Binary), Just(Shape::NonBinary)]
}

fn prio() -> impl Strategy<Value = Prio> {
    prop_oneof![Just(Prio::Empty), Just(Prio::Score), Just(Prio::NonScore)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weak_reach_preserves_optimal_repairs(seed in any::<u64>(), shape in shape(), prio in prio()) {
        let case = random_case(seed, shape, prio);
        for answer in case.answers.iter().take(4) {
            for kind in [RepairKind::P, RepairKind::G, RepairKind::C] {
                let (full, local) = both_sides(&case.instance, answer, ReachMode::Weak, kind);
                prop_assert_eq!(full, local, "seed {} {}", seed, kind);
            }
        }
    }

    #[test]
    fn strong_reach_preserves_pareto_optimal_repairs(seed in any::<u64>(), shape in shape(), prio in prio()) {
        let case = random_case(seed, shape, prio);
        for answer in case.answers.iter().take(4) {
            let (full, local) = both_sides(&case.instance, answer, ReachMode::Strong, RepairKind::P);
            prop_assert_eq!(full, local, "seed {}", seed);
        }
    }

    #[test]
    fn strong_reach_is_inside_weak_reach(seed in any::<u64>(), shape in shape(), prio in prio()) {
        let case = random_case(seed, shape, prio);
        for answer in &case.answers {
            let seed_set = answer.cause_union();
            let s = reach(&case.instance, &seed_set, ReachMode::Strong).unwrap();
            let w = reach(&case.instance, &seed_set, ReachMode::Weak).unwrap();
            prop_assert!(seed_set.is_subset(&s));
            prop_assert!(s.is_subset(&w));
            if case.instance.is_binary() {
                prop_assert_eq!(&s, &w);
                prop_assert_eq!(&w, &reach(&case.instance, &seed_set, ReachMode::BinaryGraph).unwrap());
            }
        }
    }
}
