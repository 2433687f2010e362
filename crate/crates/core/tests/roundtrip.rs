mod common;

use std::collections::BTreeSet;

use common::{random_case, Prio, Shape};
use optrep::bench::{gen_instance, GenParams, PrioMode};
use optrep::emit::{emit_answers_file, emit_conflict_facts, emit_pref_facts};
use optrep::ingest::{load_answers, load_instance};
use optrep::model::restrict;
use optrep::optimality::oracle::Oracle;
use optrep::optimality::Budget;
use optrep::{AnswerCauses, PrioritizedInstance, RepairKind, ValidationMode};
use proptest::prelude::*;

fn causes_by_name(inst: &PrioritizedInstance, a: &AnswerCauses) -> BTreeSet<Vec<String>> {
    a.causes.iter().map(|c| inst.names_of(&c.facts)).collect()
}

fn roundtrip(inst: &PrioritizedInstance, answers: &[AnswerCauses]) -> Result<(), TestCaseError> {
    let conf = emit_conflict_facts(inst);
    let pref = emit_pref_facts(inst);
    let mut back = load_instance(&conf, &pref).unwrap();
    // Facts outside every conflict are not written to the conflict file.
    prop_assert!(back.same_structure(&restrict(inst, inst.conflicting())));
    let loaded = load_answers(&emit_answers_file(inst, answers), &mut back, ValidationMode::Strict).unwrap();
    prop_assert_eq!(loaded.len(), answers.len());
    for (a, b) in answers.iter().zip(&loaded) {
        prop_assert_eq!(&a.answer_id, &b.answer_id);
        prop_assert_eq!(causes_by_name(inst, a), causes_by_name(&back, b));
    }
    Ok(())
}

fn prio() -> impl Strategy<Value = Prio> {
    prop_oneof![Just(Prio::Empty), Just(Prio::Score), Just(Prio::NonScore)]
}

fn gen_prio() -> impl Strategy<Value = PrioMode> {
    prop_oneof![
        Just(PrioMode::Empty),
        (1u32..6).prop_map(|levels| PrioMode::ScoreStructured { levels }),
        (0.0f64..=1.0).prop_map(|orient_prob| PrioMode::NonScore { orient_prob }),
        (1u32..5).prop_map(|groups| PrioMode::RuleLike { groups }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emitted_facts_load_back(seed in any::<u64>(), binary in any::<bool>(), prio in prio()) {
        let shape = if binary { Shape::Binary } else { Shape::NonBinary };
        let case = random_case(seed, shape, prio);
        roundtrip(&case.instance, &case.answers)?;
    }

    #[test]
    fn generated_instances_load_back(seed in any::<u64>(), prio in gen_prio(), nonbinary in 0usize..3) {
        let params = GenParams { n_facts: 60, conflict_ratio: 0.3, nonbinary_count: nonbinary, binary: nonbinary == 0, prio, seed, ..Default::default() };
        let (inst, answers) = gen_instance(&params).unwrap();
        roundtrip(&inst, &answers)?;
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), prio in gen_prio()) {
        let params = GenParams { n_facts: 80, conflict_ratio: 0.25, prio, seed, ..Default::default() };
        let (a, qa) = gen_instance(&params).unwrap();
        let (b, qb) = gen_instance(&params).unwrap();
        prop_assert!(a.same_structure(&b));
        prop_assert_eq!(qa, qb);
        prop_assert_eq!(emit_conflict_facts(&a), emit_conflict_facts(&b));
        prop_assert_eq!(emit_pref_facts(&a), emit_pref_facts(&b));
    }

    /// Under a score-structured priority the three notions of optimality agree.
    #[test]
    fn score_structured_collapses_p_g_c(seed in any::<u64>(), binary in any::<bool>()) {
        let shape = if binary { Shape::Binary } else { Shape::NonBinary };
        let case = random_case(seed, shape, Prio::Score);
        let oracle = Oracle::new(&case.instance).unwrap();
        let budget = Budget::unlimited();
        let p = oracle.optimal_repairs(RepairKind::P, &budget).unwrap();
        prop_assert_eq!(&p, &oracle.optimal_repairs(RepairKind::G, &budget).unwrap());
        prop_assert_eq!(&p, &oracle.optimal_repairs(RepairKind::C, &budget).unwrap());
    }
}
